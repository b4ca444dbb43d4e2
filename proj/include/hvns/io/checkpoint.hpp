#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hvns/dynamics.hpp"

namespace hvns::io {

// Checkpoint layout, all integers and doubles little-endian:
//
//   offset  size  field
//   0       8     magic "HVNSCKPT"
//   8       4     u32 format version (1)
//   12      4     i32 d
//   16      4     i32 N
//   20      8     f64 L
//   28      8     f64 nu
//   36      8     f64 eps
//   44      8     f64 l
//   52      8     f64 t
//   60      8     i64 step_index
//   68      8     u64 coefficient count = d * modes
//   76      16*n  coefficients as (re, im) f64 pairs
//
// Coefficients are stored component by component; within a component the
// half-spectrum is row-major over the first d-1 axes (FFT order, 0..N-1)
// with the last axis holding 0..N/2.

inline constexpr char kCheckpointMagic[8] = {'H', 'V', 'N', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  int d = 0;
  int n = 0;
  double length = 0.0;
  double nu = 0.0;
  double eps = 0.0;
  double l = 0.0;
  SimState state;
};

namespace detail {

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& path) : data_(data), path_(path) {}
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw IoError(path_ + ": checkpoint truncated");
  }
  const std::string& data_;
  const std::string& path_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<char> encode_checkpoint(const SimState& s, const PhysicalParams& p) {
  const BoxSpec& box = s.u.box();
  detail::ByteWriter w;
  w.raw(kCheckpointMagic, 8);
  w.u32(kCheckpointVersion);
  w.i32(box.dim());
  w.i32(box.n());
  w.f64(box.length());
  w.f64(p.nu);
  w.f64(p.eps);
  w.f64(p.l);
  w.f64(s.t);
  w.i64(s.step_index);
  const auto coeffs = s.u.raw();
  w.u64(coeffs.size());
  for (const auto& c : coeffs) {
    w.f64(c.real());
    w.f64(c.imag());
  }
  return w.bytes();
}

inline void save_checkpoint(const std::string& path, const SimState& s, const PhysicalParams& p) {
  const auto bytes = encode_checkpoint(s, p);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (out.fail()) throw IoError("write failed on " + path);
}

inline Checkpoint decode_checkpoint(const std::string& data, const std::string& path = "<memory>") {
  detail::ByteReader r(data, path);
  char magic[8];
  r.raw(magic, 8);
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0) throw IoError(path + ": not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.d = r.i32();
  c.n = r.i32();
  c.length = r.f64();
  c.nu = r.f64();
  c.eps = r.f64();
  c.l = r.f64();
  c.state.t = r.f64();
  c.state.step_index = r.i64();
  BoxSpec box;
  try {
    box = BoxSpec(c.d, c.length, c.n);
  } catch (const ContractError& e) {
    throw IoError(path + ": invalid box in checkpoint header (" + e.what() + ")");
  }
  SpectralField u(box);
  const std::uint64_t count = r.u64();
  if (count != u.raw().size()) throw IoError(path + ": coefficient count does not match the header box");
  for (auto& z : u.raw()) {
    const double re = r.f64();
    const double im = r.f64();
    z = Complex(re, im);
  }
  if (!r.at_end()) throw IoError(path + ": trailing bytes after the payload");
  c.state.u = std::move(u);
  return c;
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str(), path);
}

/// Loads a checkpoint for a run on `box`; a different box is an error, never a resample.
inline SimState load_checkpoint(const std::string& path, const BoxSpec& box) {
  Checkpoint c = read_checkpoint(path);
  if (!(c.state.u.box() == box)) {
    throw StructuralError(path + ": checkpoint box mismatch (" + c.state.u.box().describe() + " vs " +
                          box.describe() + ")");
  }
  return std::move(c.state);
}

}  // namespace hvns::io
