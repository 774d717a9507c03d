#include "sad/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "sad/core/error.hpp"

namespace sad::nn {

namespace {

constexpr const char* kFormatLine = "sad-checkpoint 1";

std::vector<unsigned char> to_little_endian(const Matrix<float>& m) {
  std::vector<unsigned char> bytes(static_cast<std::size_t>(m.size()) * 4);
  std::memcpy(bytes.data(), m.data(), bytes.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < bytes.size(); i += 4) {
      std::swap(bytes[i], bytes[i + 3]);
      std::swap(bytes[i + 1], bytes[i + 2]);
    }
  }
  return bytes;
}

void from_little_endian(const unsigned char* src, Matrix<float>& m) {
  std::vector<unsigned char> bytes(src, src + m.size() * 4);
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < bytes.size(); i += 4) {
      std::swap(bytes[i], bytes[i + 3]);
      std::swap(bytes[i + 1], bytes[i + 2]);
    }
  }
  std::memcpy(m.data(), bytes.data(), bytes.size());
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  auto p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t params_checksum(const NetworkParams<float>& params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& t : params.tensors()) {
    const auto bytes = to_little_endian(t.value);
    h = fnv1a64(bytes.data(), bytes.size(), h);
  }
  return h;
}

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());

  std::vector<unsigned char> payload;
  std::ostringstream manifest;
  const auto& s = ckpt.params.shape();
  manifest << kFormatLine << "\n";
  manifest << "shape " << s.input_dim << ' ' << s.hidden_dim << ' ' << s.lstm_layers << ' ' << s.num_actions
           << ' ' << s.hand_size << ' ' << (s.aux_head ? 1 : 0) << "\n";
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw IoError("checkpoint metadata keys may not contain spaces or newlines: " + k);
    }
    manifest << "meta " << k << ' ' << v << "\n";
  }
  for (const auto& t : ckpt.params.tensors()) {
    manifest << "tensor " << t.name << ' ' << t.value.rows() << ' ' << t.value.cols() << ' ' << payload.size()
             << "\n";
    const auto bytes = to_little_endian(t.value);
    payload.insert(payload.end(), bytes.begin(), bytes.end());
  }
  manifest << "checksum " << std::hex << fnv1a64(payload.data(), payload.size()) << std::dec << "\n";

  std::ofstream bin(dir / "tensors.bin", std::ios::binary);
  bin.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  std::ofstream man(dir / "manifest.txt");
  man << manifest.str();
  if (!bin || !man) throw IoError("failed writing checkpoint to " + dir.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream man(dir / "manifest.txt");
  if (!man) throw IoError("cannot open " + (dir / "manifest.txt").string());
  std::ifstream bin(dir / "tensors.bin", std::ios::binary);
  if (!bin) throw IoError("cannot open " + (dir / "tensors.bin").string());
  std::vector<unsigned char> payload((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

  std::string line;
  if (!std::getline(man, line) || line != kFormatLine) throw ParseError("checkpoint: unknown format");

  struct Entry {
    std::string name;
    long rows, cols;
    std::size_t offset;
  };
  Checkpoint ckpt;
  NetworkShape shape;
  bool have_shape = false, have_checksum = false;
  std::uint64_t checksum = 0;
  std::vector<Entry> entries;
  while (std::getline(man, line)) {
    std::istringstream in(line);
    std::string kind;
    if (!(in >> kind)) continue;
    if (kind == "shape") {
      int aux = 0;
      if (!(in >> shape.input_dim >> shape.hidden_dim >> shape.lstm_layers >> shape.num_actions >> shape.hand_size >>
            aux)) {
        throw ParseError("checkpoint: bad shape line");
      }
      shape.aux_head = aux != 0;
      have_shape = true;
    } else if (kind == "meta") {
      std::string key, value;
      in >> key;
      std::getline(in >> std::ws, value);
      ckpt.metadata[key] = value;
    } else if (kind == "tensor") {
      Entry e;
      if (!(in >> e.name >> e.rows >> e.cols >> e.offset)) throw ParseError("checkpoint: bad tensor line");
      entries.push_back(e);
    } else if (kind == "checksum") {
      if (!(in >> std::hex >> checksum)) throw ParseError("checkpoint: bad checksum line");
      have_checksum = true;
    } else {
      throw ParseError("checkpoint: unknown manifest entry '" + kind + "'");
    }
  }
  if (!have_shape || !have_checksum) throw ParseError("checkpoint: manifest incomplete");
  if (fnv1a64(payload.data(), payload.size()) != checksum) throw ParseError("checkpoint: payload checksum mismatch");

  ckpt.params = NetworkParams<float>(shape);
  auto& tensors = ckpt.params.tensors();
  if (entries.size() != tensors.size()) throw ParseError("checkpoint: tensor count does not match shape");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    auto& t = tensors[i];
    if (e.name != t.name || e.rows != t.value.rows() || e.cols != t.value.cols()) {
      throw ParseError("checkpoint: tensor '" + e.name + "' does not match network layout");
    }
    if (e.offset + static_cast<std::size_t>(t.value.size()) * 4 > payload.size()) {
      throw ParseError("checkpoint: payload truncated");
    }
    from_little_endian(payload.data() + e.offset, t.value);
  }
  return ckpt;
}

}  // namespace sad::nn
