#include "oodgen/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace oodgen {

namespace {

constexpr char kMagic[8] = {'O', 'G', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  if (n > (1u << 20)) throw std::runtime_error("checkpoint: implausible string length");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& kind, const ParamSet& params,
                     std::uint64_t vocab_hash, std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_string(out, kind);
  write_u64(out, vocab_hash);
  write_u64(out, config_hash);
  write_u64(out, params.size());
  for (const auto& p : params) {
    write_string(out, p.name);
    write_u64(out, static_cast<std::uint64_t>(p.value.rows()));
    write_u64(out, static_cast<std::uint64_t>(p.value.cols()));
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(sizeof(double) * p.value.size()));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

CheckpointInfo load_checkpoint(const std::string& path, const std::string& expected_kind,
                               ParamSet& params, std::uint64_t expected_vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);

  CheckpointInfo info;
  info.kind = read_string(in);
  if (info.kind != expected_kind)
    throw std::runtime_error("checkpoint: " + path + " holds a '" + info.kind +
                             "' model, expected '" + expected_kind + "'");
  info.vocab_hash = read_u64(in);
  info.config_hash = read_u64(in);
  if (info.vocab_hash != expected_vocab_hash)
    throw std::runtime_error("checkpoint: vocabulary hash mismatch for " + path);

  const std::uint64_t count = read_u64(in);
  if (count != params.size())
    throw std::runtime_error("checkpoint: parameter count mismatch for " + path);
  for (std::size_t i = 0; i < count; ++i) {
    Param& p = params.at(i);
    const std::string name = read_string(in);
    const std::uint64_t rows = read_u64(in), cols = read_u64(in);
    if (name != p.name || rows != static_cast<std::uint64_t>(p.value.rows()) ||
        cols != static_cast<std::uint64_t>(p.value.cols()))
      throw std::runtime_error("checkpoint: parameter '" + name + "' does not match model");
    in.read(reinterpret_cast<char*>(p.value.data()),
            static_cast<std::streamsize>(sizeof(double) * p.value.size()));
  }
  if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
  return info;
}

}  // namespace oodgen
