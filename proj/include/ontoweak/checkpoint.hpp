#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "ontoweak/tape.hpp"

namespace ontoweak {

inline constexpr std::string_view kCheckpointMagic = "ONTOWEAK1";

/// Parameters plus the text needed to rebuild the model that owns them.
///
/// Layout: the magic line, then "section <name> <bytes>" blocks of UTF-8
/// text, then "params <count>" followed by one "param <name> <rows> <cols>
/// <trainable>" line per tensor, each followed by rows * cols little-endian
/// IEEE-754 doubles in row-major order.
struct Checkpoint {
  /// Resolved run configuration (key=value lines).
  std::string config;
  /// Label space and training statistics (key=value lines).
  std::string model;
  ParameterSet params;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// key=value lines into a map; used for the model section.
std::map<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace ontoweak
