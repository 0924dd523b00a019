#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "apneakit/features.hpp"
#include "apneakit/signal_io.hpp"

namespace apneakit::cli {

// One retained 60 s window: labels plus the extracted features the two
// classifiers consume. EDR is the fixed 240-sample 4 Hz trace.
struct CachedSegment {
  double start_s = 0.0;
  Label stage_label = Label::unknown;
  Label resp_label = Label::unknown;
  FeatureSequences seqs;
  std::vector<float> edr;
};

struct SubjectCache {
  std::string subject_id;
  double ecg_fs = 0.0;
  std::vector<CachedSegment> segments;
};

void write_cache(const std::filesystem::path& path, const SubjectCache& cache);
SubjectCache read_cache(const std::filesystem::path& path);

}  // namespace apneakit::cli
