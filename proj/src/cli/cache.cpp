#include "apneakit/cli/cache.hpp"

#include <cstring>
#include <fstream>

namespace apneakit::cli {

namespace {

constexpr char kMagic[4] = {'A', 'P', 'N', 'F'};
constexpr uint32_t kVersion = 1;
constexpr size_t kEdrSamples = 240;

template <typename T>
void write_pod(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) fail(ErrorCode::io_error, path.string() + ": truncated cache");
  return value;
}

void write_f32(std::ofstream& out, const double* src, size_t n) {
  for (size_t i = 0; i < n; ++i) write_pod(out, float(src[i]));
}

void read_f32(std::ifstream& in, const std::filesystem::path& path,
              double* dst, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = double(read_pod<float>(in, path));
}

}  // namespace

void write_cache(const std::filesystem::path& path, const SubjectCache& cache) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, uint32_t(cache.subject_id.size()));
  out.write(cache.subject_id.data(), std::streamsize(cache.subject_id.size()));
  write_pod(out, cache.ecg_fs);
  write_pod(out, uint32_t(cache.segments.size()));
  for (const auto& seg : cache.segments) {
    write_pod(out, seg.start_s);
    write_pod(out, uint8_t(seg.stage_label));
    write_pod(out, uint8_t(seg.resp_label));
    write_f32(out, seg.seqs.rr_intervals.data(), seg.seqs.rr_intervals.size());
    write_f32(out, seg.seqs.q_amps.data(), seg.seqs.q_amps.size());
    write_f32(out, seg.seqs.r_amps.data(), seg.seqs.r_amps.size());
    write_f32(out, seg.seqs.edr_amps.data(), seg.seqs.edr_amps.size());
    write_f32(out, seg.seqs.edr_peak_intervals.data(),
              seg.seqs.edr_peak_intervals.size());
    if (seg.edr.size() != kEdrSamples)
      fail(ErrorCode::shape_mismatch, "cache EDR must hold 240 samples");
    out.write(reinterpret_cast<const char*>(seg.edr.data()),
              std::streamsize(seg.edr.size() * sizeof(float)));
  }
  if (!out) fail(ErrorCode::io_error, "write failed: " + path.string());
}

SubjectCache read_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::run_preprocess_first,
         path.string() + ": feature cache not found; run preprocess first");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorCode::io_error, path.string() + ": not a feature cache");
  if (read_pod<uint32_t>(in, path) != kVersion)
    fail(ErrorCode::io_error, path.string() + ": unsupported cache version");

  SubjectCache cache;
  const auto id_len = read_pod<uint32_t>(in, path);
  cache.subject_id.resize(id_len);
  in.read(cache.subject_id.data(), id_len);
  cache.ecg_fs = read_pod<double>(in, path);
  const auto count = read_pod<uint32_t>(in, path);
  cache.segments.resize(count);
  for (auto& seg : cache.segments) {
    seg.start_s = read_pod<double>(in, path);
    seg.stage_label = Label(read_pod<uint8_t>(in, path));
    seg.resp_label = Label(read_pod<uint8_t>(in, path));
    read_f32(in, path, seg.seqs.rr_intervals.data(),
             seg.seqs.rr_intervals.size());
    read_f32(in, path, seg.seqs.q_amps.data(), seg.seqs.q_amps.size());
    read_f32(in, path, seg.seqs.r_amps.data(), seg.seqs.r_amps.size());
    read_f32(in, path, seg.seqs.edr_amps.data(), seg.seqs.edr_amps.size());
    read_f32(in, path, seg.seqs.edr_peak_intervals.data(),
             seg.seqs.edr_peak_intervals.size());
    seg.edr.resize(kEdrSamples);
    in.read(reinterpret_cast<char*>(seg.edr.data()),
            std::streamsize(kEdrSamples * sizeof(float)));
    if (!in) fail(ErrorCode::io_error, path.string() + ": truncated cache");
  }
  return cache;
}

}  // namespace apneakit::cli
