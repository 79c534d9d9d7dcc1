#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace tvmpc {

/// Version tag recorded in every manifest.
extern const char* const kVersionTag;

/// Description of one bench run, written before any compute starts.
struct RunManifest {
  std::string command;
  std::string env;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version = kVersionTag;
  std::string out_dir;
  int workers = 1;

  nlohmann::json to_json() const;
  /// FNV-1a of the canonical JSON of everything that affects results (the output
  /// directory and worker count are excluded), as 16 hex digits.
  std::string hash() const;
  /// Writes `manifest.json` into `out_dir`.
  void write() const;
};

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace tvmpc
