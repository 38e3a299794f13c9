#include "dgat/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

namespace dgat {

namespace {

constexpr char kMagic[4] = {'D', 'G', 'A', 'T'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); }
void write_u64(std::ostream& out, uint64_t v) { out.write(reinterpret_cast<char*>(&v), 8); }
void write_str(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

[[noreturn]] void corrupted(const std::string& what) {
  throw std::runtime_error("corrupted checkpoint: " + what);
}

uint32_t read_u32(std::istream& in, const char* what) {
  uint32_t v;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) corrupted(what);
  return v;
}
uint64_t read_u64(std::istream& in, const char* what) {
  uint64_t v;
  if (!in.read(reinterpret_cast<char*>(&v), 8)) corrupted(what);
  return v;
}
std::string read_str(std::istream& in, const char* what) {
  uint32_t len = read_u32(in, what);
  if (len > (1u << 20)) corrupted(what);
  std::string s(len, '\0');
  if (!in.read(s.data(), len)) corrupted(what);
  return s;
}

std::map<std::string, std::string> config_fields(const ModelConfig& cfg, Precision precision) {
  return {
      {"kind", layer_kind_name(cfg.kind)},
      {"num_layers", std::to_string(cfg.num_layers)},
      {"hidden_dim", std::to_string(cfg.hidden_dim)},
      {"num_classes", std::to_string(cfg.num_classes)},
      {"leaky_slope", std::to_string(cfg.leaky_slope)},
      {"self_loops", cfg.self_loops ? "1" : "0"},
      {"bias", cfg.bias ? "1" : "0"},
      {"dedgat_same_role", cfg.dedgat_same_role ? "1" : "0"},
      {"seed", std::to_string(cfg.seed)},
      {"precision", precision == Precision::kDouble ? "double" : "single"},
  };
}

}  // namespace

void save_checkpoint(const ParamStore& params, const ModelConfig& cfg, Precision precision,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out.write(kMagic, 4);
  write_u32(out, kVersion);

  auto fields = config_fields(cfg, precision);
  write_u32(out, static_cast<uint32_t>(fields.size()));
  for (const auto& [k, v] : fields) {
    write_str(out, k);
    write_str(out, v);
  }

  for (const auto& [name, entry] : params) {
    write_str(out, name);
    write_u64(out, static_cast<uint64_t>(entry.value.rows));
    write_u64(out, static_cast<uint64_t>(entry.value.cols));
    if (precision == Precision::kDouble) {
      out.write(reinterpret_cast<const char*>(entry.value.data.data()),
                static_cast<std::streamsize>(entry.value.data.size() * sizeof(double)));
    } else {
      std::vector<float> buf(entry.value.data.begin(), entry.value.data.end());
      out.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    corrupted("bad magic bytes");
  uint32_t version = read_u32(in, "version");
  if (version != kVersion)
    throw std::runtime_error("checkpoint format version mismatch: got " +
                             std::to_string(version) + ", expected " + std::to_string(kVersion));

  std::map<std::string, std::string> fields;
  uint32_t field_count = read_u32(in, "config field count");
  for (uint32_t i = 0; i < field_count; ++i) {
    std::string k = read_str(in, "config field name");
    fields[k] = read_str(in, "config field value");
  }
  auto field = [&](const char* name) -> const std::string& {
    auto it = fields.find(name);
    if (it == fields.end()) corrupted(std::string("missing config field ") + name);
    return it->second;
  };

  Checkpoint ckpt;
  ckpt.config.kind = layer_kind_from_name(field("kind"));
  ckpt.config.num_layers = std::stoi(field("num_layers"));
  ckpt.config.hidden_dim = std::stoi(field("hidden_dim"));
  ckpt.config.num_classes = std::stoi(field("num_classes"));
  ckpt.config.leaky_slope = std::stod(field("leaky_slope"));
  ckpt.config.self_loops = field("self_loops") == "1";
  ckpt.config.bias = field("bias") == "1";
  ckpt.config.dedgat_same_role = field("dedgat_same_role") == "1";
  ckpt.config.seed = std::stoull(field("seed"));
  ckpt.precision = field("precision") == "single" ? Precision::kSingle : Precision::kDouble;

  while (true) {
    in.peek();
    if (in.eof()) break;
    std::string name = read_str(in, "parameter name");
    uint64_t rows = read_u64(in, "parameter rows");
    uint64_t cols = read_u64(in, "parameter cols");
    if (rows > (1ull << 32) || cols > (1ull << 32) || rows * cols > (1ull << 32))
      corrupted("implausible parameter shape");
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    if (ckpt.precision == Precision::kDouble) {
      if (!in.read(reinterpret_cast<char*>(m.data.data()),
                   static_cast<std::streamsize>(m.data.size() * sizeof(double))))
        corrupted("truncated parameter values for " + name);
    } else {
      std::vector<float> buf(m.data.size());
      if (!in.read(reinterpret_cast<char*>(buf.data()),
                   static_cast<std::streamsize>(buf.size() * sizeof(float))))
        corrupted("truncated parameter values for " + name);
      std::copy(buf.begin(), buf.end(), m.data.begin());
    }
    ckpt.params.insert(name, std::move(m));
  }
  return ckpt;
}

}  // namespace dgat
