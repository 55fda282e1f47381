#include "ontoweak/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "ontoweak/errors.hpp"
#include "ontoweak/text.hpp"

namespace ontoweak {

namespace {

std::string read_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(std::string("checkpoint truncated before ") + what);
  return line;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kCheckpointMagic << '\n';
  out << "section config " << ckpt.config.size() << '\n' << ckpt.config;
  out << "section model " << ckpt.model.size() << '\n' << ckpt.model;
  out << "params " << ckpt.params.size() << '\n';
  for (const Parameter& p : ckpt.params) {
    out << "param " << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << ' '
        << (p.trainable ? 1 : 0) << '\n';
    for (double v : p.value.data()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      char bytes[8];
      for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
      out.write(bytes, 8);
    }
    out << '\n';
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  if (read_line(in, "magic") != kCheckpointMagic) throw FormatError("not an ONTOWEAK1 checkpoint");
  Checkpoint ckpt;
  for (const char* expected : {"config", "model"}) {
    const auto header = split(read_line(in, "section"), ' ');
    if (header.size() != 3 || header[0] != "section" || header[1] != expected)
      throw FormatError(std::string("checkpoint missing section ") + expected);
    const auto bytes = static_cast<std::size_t>(parse_int(header[2], "section size"));
    std::string text(bytes, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(bytes)))
      throw FormatError("checkpoint section truncated");
    (header[1] == "config" ? ckpt.config : ckpt.model) = std::move(text);
  }
  const auto count_line = split(read_line(in, "params"), ' ');
  if (count_line.size() != 2 || count_line[0] != "params")
    throw FormatError("checkpoint missing params header");
  const auto count = parse_int(count_line[1], "param count");
  for (long long i = 0; i < count; ++i) {
    const auto h = split(read_line(in, "param"), ' ');
    if (h.size() != 5 || h[0] != "param") throw FormatError("bad param header");
    const auto rows = static_cast<std::size_t>(parse_int(h[2], "rows"));
    const auto cols = static_cast<std::size_t>(parse_int(h[3], "cols"));
    std::vector<double> data(rows * cols);
    unsigned char bytes[8];
    for (double& v : data) {
      if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw FormatError("param payload truncated");
      std::uint64_t bits = 0;
      for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[b];
      v = std::bit_cast<double>(bits);
    }
    read_line(in, "param terminator");
    ckpt.params.add(h[1], Matrix(rows, cols, std::move(data)), h[4] == "1");
  }
  if (read_line(in, "end") != "end") throw FormatError("checkpoint missing end marker");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  write_checkpoint(out, ckpt);
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  for (const auto& line : split(text, '\n')) {
    const auto trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected key=value, got '" + line + "'");
    out[std::string(trim(trimmed.substr(0, eq)))] = std::string(trim(trimmed.substr(eq + 1)));
  }
  return out;
}

}  // namespace ontoweak
