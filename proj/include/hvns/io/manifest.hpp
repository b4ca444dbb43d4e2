#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hvns/errors.hpp"

#ifndef HVNS_VERSION
#define HVNS_VERSION "0.1.0"
#endif

namespace hvns::io {

/// Build identifier recorded in every manifest.
inline std::string build_id() {
  std::string id = std::string("hvns ") + HVNS_VERSION;
#if defined(__clang__)
  id += " clang " __clang_version__;
#elif defined(__GNUC__)
  id += " gcc " __VERSION__;
#endif
#ifdef NDEBUG
  id += " release";
#else
  id += " debug";
#endif
  return id;
}

/// UTC wall time, ISO 8601 with seconds.
inline std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_digest;
  std::string build = build_id();
  std::uint64_t seed = 0;
  std::string start_time = utc_now();
  std::string end_time;
  std::vector<std::string> outputs;
  std::vector<std::string> flags;
  nlohmann::ordered_json invariants = nlohmann::ordered_json::object();  // name -> bool
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  bool ok = true;

  /// Records one asserted invariant; any failure makes the run unsuccessful.
  void check(const std::string& name, bool held) {
    invariants[name] = held;
    ok = ok && held;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["config"] = config_path;
    j["config_digest"] = config_digest;
    j["build"] = build;
    j["seed"] = seed;
    j["start_time"] = start_time;
    j["end_time"] = end_time;
    j["outputs"] = outputs;
    j["flags"] = flags;
    j["invariants"] = invariants;
    j["status"] = ok ? "ok" : "invariant-failed";
    j["summary"] = summary;
    return j;
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << to_json().dump(2) << '\n';
    out.close();
    if (out.fail()) throw IoError("write failed on " + path);
  }
};

}  // namespace hvns::io
