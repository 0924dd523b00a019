#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apneakit/nn/layers.hpp"

namespace apneakit::nn {

// APNW weights container, little-endian:
//   magic "APNW", format version u32, class count u32, entry count u32,
//   then per entry: kind u8, rank u8, dims u32[rank], payload f32[].
// Entries follow model traversal order. A text manifest with one
// "<index> <kind> <dims> fnv1a:<hex>" line per entry is written alongside.
inline constexpr uint32_t kWeightsFormatVersion = 1;

uint64_t fnv1a64(const void* data, size_t bytes);

struct WeightsEntryInfo {
  uint8_t kind = 0;
  std::vector<uint32_t> dims;
  uint64_t checksum = 0;
};

namespace detail {

void write_weights_file(const std::filesystem::path& path, uint32_t class_count,
                        const std::vector<WeightsEntryInfo>& entries,
                        const std::vector<std::vector<float>>& payloads);

struct LoadedWeights {
  uint32_t class_count = 0;
  std::vector<WeightsEntryInfo> entries;
  std::vector<std::vector<float>> payloads;
};

LoadedWeights read_weights_file(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path,
                    const std::vector<WeightsEntryInfo>& entries);

}  // namespace detail

template <typename T>
void save_weights(Model<T>& model, const std::filesystem::path& path) {
  std::vector<WeightsEntryInfo> entries;
  std::vector<std::vector<float>> payloads;
  for (const auto& state : model.state_entries()) {
    WeightsEntryInfo info;
    info.kind = uint8_t(state.kind);
    for (int d : state.tensor->shape) info.dims.push_back(uint32_t(d));
    std::vector<float> payload(state.tensor->data.size());
    for (size_t i = 0; i < payload.size(); ++i)
      payload[i] = float(state.tensor->data[i]);
    info.checksum = fnv1a64(payload.data(), payload.size() * sizeof(float));
    entries.push_back(std::move(info));
    payloads.push_back(std::move(payload));
  }
  detail::write_weights_file(path, uint32_t(model.num_classes), entries,
                             payloads);
  detail::write_manifest(path.string() + ".manifest.txt", entries);
}

template <typename T>
void load_weights(Model<T>& model, const std::filesystem::path& path) {
  const auto loaded = detail::read_weights_file(path);
  if (int(loaded.class_count) != model.num_classes)
    fail(ErrorCode::shape_mismatch,
         path.string() + ": class count " + std::to_string(loaded.class_count) +
             " does not match model (" + std::to_string(model.num_classes) +
             ")");
  auto states = model.state_entries();
  if (states.size() != loaded.entries.size())
    fail(ErrorCode::shape_mismatch,
         path.string() + ": entry count " +
             std::to_string(loaded.entries.size()) + " does not match model (" +
             std::to_string(states.size()) + ")");
  for (size_t i = 0; i < states.size(); ++i) {
    const auto& info = loaded.entries[i];
    if (info.kind != uint8_t(states[i].kind))
      fail(ErrorCode::shape_mismatch,
           path.string() + ": entry " + std::to_string(i) + " kind mismatch");
    const auto& shape = states[i].tensor->shape;
    if (info.dims.size() != shape.size())
      fail(ErrorCode::shape_mismatch,
           path.string() + ": entry " + std::to_string(i) + " rank mismatch");
    for (size_t d = 0; d < shape.size(); ++d)
      if (int64_t(info.dims[d]) != int64_t(shape[d]))
        fail(ErrorCode::shape_mismatch,
             path.string() + ": entry " + std::to_string(i) + " dim mismatch");
    auto& dst = states[i].tensor->data;
    const auto& src = loaded.payloads[i];
    for (size_t j = 0; j < dst.size(); ++j) dst[j] = T(src[j]);
  }
}

// Checksum of the serialized f32 payloads; used by determinism tests.
template <typename T>
uint64_t weights_checksum(Model<T>& model) {
  uint64_t h = 1469598103934665603ull;
  for (const auto& state : model.state_entries()) {
    std::vector<float> payload(state.tensor->data.size());
    for (size_t i = 0; i < payload.size(); ++i)
      payload[i] = float(state.tensor->data[i]);
    const uint64_t entry = fnv1a64(payload.data(), payload.size() * sizeof(float));
    h ^= entry;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace apneakit::nn
