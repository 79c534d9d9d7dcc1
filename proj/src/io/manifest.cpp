#include "tvmpc/io/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tvmpc/core/errors.hpp"

namespace tvmpc {

const char* const kVersionTag = "tvmpc-0.1.0";

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["env"] = env;
  j["config"] = config;
  j["seed"] = seed;
  j["version"] = version;
  j["out_dir"] = out_dir;
  j["workers"] = workers;
  j["hash"] = hash();
  return j;
}

std::string RunManifest::hash() const {
  nlohmann::json j;
  j["command"] = command;
  j["env"] = env;
  j["config"] = config;
  j["seed"] = seed;
  j["version"] = version;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

void RunManifest::write() const {
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / "manifest.json";
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << to_json().dump(2) << '\n';
}

}  // namespace tvmpc
