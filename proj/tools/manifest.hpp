#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace macfb::cli {

/// SHA-256 of a byte string (hex).
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// Reproducibility header: resolved parameters plus input digests, recorded
/// before any computation runs. The timestamped variant goes to stderr; the
/// copy embedded in results omits the timestamp so stdout stays
/// bit-reproducible under a fixed seed.
struct RunManifest {
  std::string subcommand;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  bool has_seed = false;
  uint64_t seed = 0;

  nlohmann::json to_json(bool with_timestamp) const;
  void add_input(const std::string& path);
  void print_header() const;  // stderr, with timestamp
};

}  // namespace macfb::cli
