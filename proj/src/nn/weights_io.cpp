#include "apneakit/nn/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "weights files are little-endian");

namespace apneakit::nn {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv_std: return "conv_std";
    case LayerKind::conv_dw: return "conv_dw";
    case LayerKind::conv_pw: return "conv_pw";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::relu6: return "relu6";
    case LayerKind::avgpool_global: return "avgpool_global";
    case LayerKind::fc: return "fc";
    case LayerKind::softmax: return "softmax";
    case LayerKind::bottleneck: return "bottleneck";
  }
  return "?";
}

uint64_t fnv1a64(const void* data, size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 1469598103934665603ull;
  for (size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

namespace {

constexpr char kMagic[4] = {'A', 'P', 'N', 'W'};

template <typename U>
void write_pod(std::ofstream& out, U value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(U));
}

template <typename U>
U read_pod(std::ifstream& in, const std::filesystem::path& path) {
  U value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(U));
  if (!in)
    fail(ErrorCode::model_missing, path.string() + ": truncated weights file");
  return value;
}

}  // namespace

void write_weights_file(const std::filesystem::path& path, uint32_t class_count,
                        const std::vector<WeightsEntryInfo>& entries,
                        const std::vector<std::vector<float>>& payloads) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  out.write(kMagic, 4);
  write_pod(out, kWeightsFormatVersion);
  write_pod(out, class_count);
  write_pod(out, uint32_t(entries.size()));
  for (size_t i = 0; i < entries.size(); ++i) {
    write_pod(out, entries[i].kind);
    write_pod(out, uint8_t(entries[i].dims.size()));
    for (uint32_t d : entries[i].dims) write_pod(out, d);
    out.write(reinterpret_cast<const char*>(payloads[i].data()),
              std::streamsize(payloads[i].size() * sizeof(float)));
  }
  if (!out) fail(ErrorCode::io_error, "write failed: " + path.string());
}

LoadedWeights read_weights_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::model_missing, path.string() + ": weights file not found");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorCode::model_missing, path.string() + ": not an APNW file");
  const auto version = read_pod<uint32_t>(in, path);
  if (version != kWeightsFormatVersion)
    fail(ErrorCode::model_missing,
         path.string() + ": unsupported format version " +
             std::to_string(version));

  LoadedWeights loaded;
  loaded.class_count = read_pod<uint32_t>(in, path);
  const auto count = read_pod<uint32_t>(in, path);
  for (uint32_t i = 0; i < count; ++i) {
    WeightsEntryInfo info;
    info.kind = read_pod<uint8_t>(in, path);
    const auto rank = read_pod<uint8_t>(in, path);
    uint64_t elems = 1;
    for (uint8_t d = 0; d < rank; ++d) {
      info.dims.push_back(read_pod<uint32_t>(in, path));
      elems *= info.dims.back();
    }
    std::vector<float> payload(elems);
    in.read(reinterpret_cast<char*>(payload.data()),
            std::streamsize(elems * sizeof(float)));
    if (!in)
      fail(ErrorCode::model_missing, path.string() + ": truncated payload");
    info.checksum = fnv1a64(payload.data(), payload.size() * sizeof(float));
    loaded.entries.push_back(std::move(info));
    loaded.payloads.push_back(std::move(payload));
  }
  return loaded;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<WeightsEntryInfo>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  for (size_t i = 0; i < entries.size(); ++i) {
    out << i << ' ' << layer_kind_name(LayerKind(entries[i].kind)) << ' ';
    for (size_t d = 0; d < entries[i].dims.size(); ++d) {
      if (d) out << 'x';
      out << entries[i].dims[d];
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  (unsigned long long)entries[i].checksum);
    out << " fnv1a:" << hex << '\n';
  }
}

}  // namespace detail

}  // namespace apneakit::nn
