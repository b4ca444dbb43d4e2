#pragma once

#include <openssl/evp.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hvns/diagnostics.hpp"
#include "hvns/dynamics.hpp"
#include "hvns/errors.hpp"

namespace hvns::io {

/// Forcing shape. `grashof`, when present, rescales the amplitude so that
/// ||f|| = G nu^2 lambda_1^(3/4).
struct ForcingSpec {
  std::string kind = "kolmogorov";  // kolmogorov | none
  int wavenumber = 4;
  double amplitude = 1.0;
  std::optional<double> grashof;
};

struct InitialSpec {
  std::string kind = "random";  // random | zero | mode
  double gamma = 1.0;
  double kc = 4.0;
  double energy = 1.0;  // <= 0 keeps the raw spectrum amplitude
  std::uint64_t seed = 1;
  WaveIndex mode{1, 1, 0};
  double amplitude = 1.0;
};

/// Parameters of the studies run by the command-line subcommands.
struct StudySpec {
  std::vector<double> eps_list{1e-2, 1e-3, 1e-4, 1e-5};
  std::optional<double> reference_eps;
  std::size_t m = 8;
  double window = 10.0;
  long ortho_every = 10;
  double burn_in = -1.0;
  std::vector<double> grashof_list;
  std::size_t samples = 10000;
  std::vector<std::size_t> family_sizes{1, 2, 4, 8, 16};
  std::size_t trials = 8;
  double lt_q = 0.0;  // 0: 1 + d/(2l)
  unsigned workers = 0;
};

struct RunConfig {
  SimConfig sim;
  ForcingSpec forcing;
  InitialSpec initial;
  StudySpec study;
  std::string canonical;  // sorted "section.key=value" lines
  std::string digest;     // SHA-256 of `canonical`, hex
  std::vector<std::string> flags;  // documented defaults that were applied
};

/// Every accepted key, by section.
inline const std::map<std::string, std::set<std::string>>& config_schema() {
  static const std::map<std::string, std::set<std::string>> schema{
      {"box", {"d", "L", "N"}},
      {"params", {"nu", "eps", "l"}},
      {"time", {"dt", "t_end", "output_every", "scheme"}},
      {"forcing", {"kind", "wavenumber", "amplitude", "grashof"}},
      {"initial", {"kind", "gamma", "kc", "energy", "seed", "mode", "amplitude"}},
      {"study",
       {"eps_list", "reference_eps", "m", "window", "ortho_every", "burn_in", "grashof_list", "samples",
        "family_sizes", "trials", "lt_q", "workers"}},
  };
  return schema;
}

/// Hex SHA-256 of `text`.
inline std::string sha256_hex(const std::string& text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

/// Collects typed lookups and their errors so that all problems are reported together.
class Reader {
 public:
  Reader(const boost::property_tree::ptree& tree, std::vector<std::string>& problems)
      : tree_(tree), problems_(problems) {}

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  std::string text(const std::string& key, const std::string& fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    return v ? trim(*v) : fallback;
  }

  double number(const std::string& key, double fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    return parse_double(key, trim(*v)).value_or(fallback);
  }

  long integer(const std::string& key, long fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    const std::string s = trim(*v);
    char* end = nullptr;
    errno = 0;
    const long long x = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno != 0) {
      problems_.push_back(key + " must be an integer (got \"" + s + "\")");
      return fallback;
    }
    return static_cast<long>(x);
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    const std::string s = trim(*v);
    char* end = nullptr;
    errno = 0;
    const unsigned long long x = std::strtoull(s.c_str(), &end, 10);
    if (s.empty() || s[0] == '-' || *end != '\0' || errno != 0) {
      problems_.push_back(key + " must be an unsigned integer (got \"" + s + "\")");
      return fallback;
    }
    return x;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::istringstream in(*v);
    std::string item;
    while (in >> item) {
      if (!item.empty() && item.back() == ',') item.pop_back();
      if (item.empty()) continue;
      auto x = parse_double(key, item);
      if (!x) return fallback;
      out.push_back(*x);
    }
    return out;
  }

 private:
  std::optional<double> parse_double(const std::string& key, const std::string& s) const {
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
      problems_.push_back(key + " must be a finite number (got \"" + s + "\")");
      return std::nullopt;
    }
    return x;
  }

  const boost::property_tree::ptree& tree_;
  std::vector<std::string>& problems_;
};

}  // namespace detail

/// Canonical form: one "section.key=value" line per entry, values trimmed,
/// sorted; comments and layout do not survive.
inline std::string canonical_config(const boost::property_tree::ptree& tree) {
  std::vector<std::string> lines;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      lines.push_back(section + "=" + detail::trim(body.data()));  // stray key or empty section
      continue;
    }
    for (const auto& [key, value] : body) lines.push_back(section + "." + key + "=" + detail::trim(value.data()));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

/// Parses and validates INI config text. Throws ConfigError listing every
/// offending key. `seed`, when given, replaces initial.seed.
inline RunConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed = std::nullopt) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({"config syntax: " + e.message() + " (line " + std::to_string(e.line()) + ")"});
  }

  std::vector<std::string> problems;
  const auto& schema = config_schema();
  for (const auto& [section, body] : tree) {
    auto it = schema.find(section);
    if (body.empty() && !(it != schema.end() && body.data().empty())) {
      problems.push_back("unknown key \"" + section + "\" outside any section");
      continue;
    }
    if (it == schema.end()) {
      problems.push_back("unknown section [" + section + "]");
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) problems.push_back("unknown key " + section + "." + key);
    }
  }

  RunConfig rc;
  rc.canonical = canonical_config(tree);
  rc.digest = sha256_hex(rc.canonical);
  const detail::Reader r(tree, problems);

  const long d = r.integer("box.d", 2);
  const double L = r.number("box.L", 2.0 * std::numbers::pi);
  const long N = r.integer("box.N", 32);
  if (d != 2 && d != 3) problems.push_back("box.d must be 2 or 3");
  if (!(L > 0.0)) problems.push_back("box.L must be positive");
  if (N % 2 != 0) problems.push_back("box.N must be even");
  if (N < 8) problems.push_back("box.N must be at least 8");

  auto& p = rc.sim.params;
  p.nu = r.number("params.nu", 0.1);
  p.eps = r.number("params.eps", 0.0);
  p.l = r.number("params.l", 2.0);
  if (!r.has("params.eps")) rc.flags.push_back("params.eps omitted: eps = 0 (conventional Navier-Stokes)");
  if (!(p.nu > 0.0)) problems.push_back("params.nu must be positive");
  if (!(p.eps >= 0.0)) problems.push_back("params.eps must be non-negative");
  if (!(p.l >= 1.0)) problems.push_back("params.l must be >= 1");

  rc.sim.dt = r.number("time.dt", 0.0);
  rc.sim.t_end = r.number("time.t_end", 10.0);
  rc.sim.output_every = r.integer("time.output_every", 10);
  const std::string scheme = r.text("time.scheme", "ifrk2");
  if (scheme == "ifrk2") {
    rc.sim.scheme = Scheme::IfRk2;
  } else if (scheme == "etdrk4") {
    rc.sim.scheme = Scheme::Etdrk4;
  } else {
    problems.push_back("time.scheme must be ifrk2 or etdrk4");
  }
  if (!(rc.sim.dt >= 0.0)) problems.push_back("time.dt must be non-negative (0 selects the default step)");
  if (!(rc.sim.t_end >= 0.0)) problems.push_back("time.t_end must be non-negative");
  if (rc.sim.output_every < 1) problems.push_back("time.output_every must be >= 1");
  if (!r.has("time.dt")) rc.flags.push_back("time.dt omitted: 0.5/(k_max max(1, |u0|_inf))");

  auto& f = rc.forcing;
  f.kind = r.text("forcing.kind", "kolmogorov");
  f.wavenumber = static_cast<int>(r.integer("forcing.wavenumber", 4));
  f.amplitude = r.number("forcing.amplitude", 1.0);
  if (r.has("forcing.grashof")) f.grashof = r.number("forcing.grashof", 0.0);
  if (!r.has("forcing.kind")) rc.flags.push_back("forcing.kind omitted: Kolmogorov forcing F sin(4 x_2) e_1");
  if (f.kind != "kolmogorov" && f.kind != "none") problems.push_back("forcing.kind must be kolmogorov or none");
  if (f.wavenumber < 1) problems.push_back("forcing.wavenumber must be >= 1");
  if (f.grashof && !(*f.grashof >= 0.0)) problems.push_back("forcing.grashof must be non-negative");

  auto& ini = rc.initial;
  ini.kind = r.text("initial.kind", "random");
  ini.gamma = r.number("initial.gamma", 1.0);
  ini.kc = r.number("initial.kc", 4.0);
  ini.energy = r.number("initial.energy", 1.0);
  ini.seed = seed ? *seed : r.unsigned64("initial.seed", 1);
  ini.amplitude = r.number("initial.amplitude", 1.0);
  const auto mode = r.numbers("initial.mode", {1.0, 1.0, 0.0});
  if (mode.size() < 2 || mode.size() > 3) {
    problems.push_back("initial.mode must list 2 or 3 integer wavenumbers");
  } else {
    for (std::size_t a = 0; a < mode.size(); ++a) ini.mode[a] = static_cast<int>(mode[a]);
  }
  if (ini.kind != "random" && ini.kind != "zero" && ini.kind != "mode") {
    problems.push_back("initial.kind must be random, zero or mode");
  }
  if (!(ini.kc > 0.0)) problems.push_back("initial.kc must be positive");

  auto& s = rc.study;
  s.eps_list = r.numbers("study.eps_list", s.eps_list);
  if (r.has("study.reference_eps")) s.reference_eps = r.number("study.reference_eps", 0.0);
  s.m = static_cast<std::size_t>(std::max(0L, r.integer("study.m", 8)));
  s.window = r.number("study.window", 10.0);
  s.ortho_every = r.integer("study.ortho_every", 10);
  s.burn_in = r.number("study.burn_in", -1.0);
  s.grashof_list = r.numbers("study.grashof_list", {});
  s.samples = static_cast<std::size_t>(std::max(0L, r.integer("study.samples", 10000)));
  const auto sizes = r.numbers("study.family_sizes", {1, 2, 4, 8, 16});
  s.family_sizes.clear();
  for (double x : sizes) {
    if (x < 1 || x != std::floor(x)) {
      problems.push_back("study.family_sizes must be positive integers");
      break;
    }
    s.family_sizes.push_back(static_cast<std::size_t>(x));
  }
  if (s.family_sizes.empty()) problems.push_back("study.family_sizes must not be empty");
  s.trials = static_cast<std::size_t>(std::max(1L, r.integer("study.trials", 8)));
  s.lt_q = r.number("study.lt_q", 0.0);
  s.workers = static_cast<unsigned>(std::max(0L, r.integer("study.workers", 0)));
  if (s.m < 1) problems.push_back("study.m must be >= 1");
  if (s.ortho_every < 1) problems.push_back("study.ortho_every must be >= 1");
  if (!(s.window > 0.0)) problems.push_back("study.window must be positive");

  if (!problems.empty()) throw ConfigError(problems);

  const BoxSpec box(static_cast<int>(d), L, static_cast<int>(N));
  p.forcing = SpectralField(box);
  if (f.kind == "kolmogorov") {
    if (f.wavenumber > box.max_kept_index()) {
      throw ConfigError({"forcing.wavenumber " + std::to_string(f.wavenumber) + " lies outside the retained band"});
    }
    p.forcing = kolmogorov_forcing(box, f.wavenumber, f.amplitude);
    if (f.grashof) p.forcing *= *f.grashof * p.nu * p.nu * std::pow(box.lambda1(), 0.75) / forcing_norm(p);
  }
  try {
    if (ini.kind == "zero") {
      rc.sim.u0 = SpectralField(box);
    } else if (ini.kind == "mode") {
      SpectralField u(box);
      const auto loc = locate(box, ini.mode);
      if (!box.lattice().kept[loc.flat]) throw ContractError("initial.mode lies outside the retained band");
      const auto pol = polarizations(box.lattice().k[loc.flat], box.dim()).front();
      std::array<Complex, 3> a{};
      for (int c = 0; c < box.dim(); ++c) a[c] = Complex(0.5 * ini.amplitude * pol[c], 0.0);
      add_real_mode(u, ini.mode, a);
      rc.sim.u0 = u;
    } else {
      rc.sim.u0 = dealias(random_solenoidal(box, RandomSpectrum{ini.gamma, ini.kc, ini.energy}, ini.seed));
    }
    validate(rc.sim);
  } catch (const Error& e) {
    throw ConfigError({e.what()});
  }
  return rc;
}

/// Reads and parses a config file.
inline RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), seed);
}

}  // namespace hvns::io
