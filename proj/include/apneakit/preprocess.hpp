#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apneakit/signal_io.hpp"

namespace apneakit {

struct QualityFlags {
  bool spo2_valid = true;
  bool ecg_clean = false;
  double th1 = 0.0;  // median of the six 10 s subsegment maxima
  double th2 = 0.0;  // median of the six 10 s subsegment minima

  // th1 <= 0 or th2 >= 0 marks a flat or single-signed segment, which is
  // unusable regardless of the spike rule.
  bool degenerate() const { return !(th1 > 0.0 && th2 < 0.0); }
};

struct Segment {
  std::string subject_id;
  double start_s = 0.0;
  double len_s = 60.0;
  double ecg_fs = 0.0;
  std::vector<double> ecg;  // band-passed, mean-removed
  double spo2_fs = 0.0;
  std::vector<double> spo2;  // empty when the record has no SpO2 channel
  Label stage_label = Label::unknown;
  Label resp_label = Label::unknown;
  QualityFlags quality;
};

// Zero-phase 0.3-45 Hz band-pass: 4th-order Butterworth high- and low-pass
// biquad cascades run forward and backward over an odd-reflection extension.
// Output has the input's length and exactly zero mean.
std::vector<double> bandpass_ecg(const std::vector<double>& raw, double fs);

// true iff every sample lies in [70, 100]; an empty slice is valid.
bool spo2_valid(const std::vector<double>& spo2);

struct ArtifactVerdict {
  bool clean = false;
  double th1 = 0.0;
  double th2 = 0.0;
};

// Splits the segment into six equal subsegments, takes the median of their
// maxima (th1) and minima (th2), and flags any sample outside (2*th2, 2*th1).
// Throws degenerate_segment for flat or single-signed input.
ArtifactVerdict ecg_artifact_flag(const std::vector<double>& ecg, double fs);

// Sliding 60 s windows at a 30 s stride. ECG slices are filtered and flagged;
// SpO2 slices and window labels ride along when available.
std::vector<Segment> segment_record(const SignalRecord& record,
                                    const AnnotationTrack* stages,
                                    const AnnotationTrack* respiration,
                                    double win_s = 60.0,
                                    double stride_s = 30.0);

enum class LabelRequirement { none, stage, respiration };

struct DropSummary {
  int64_t retained = 0;
  int64_t dropped_spo2 = 0;
  int64_t dropped_ecg = 0;
  int64_t dropped_degenerate = 0;
  int64_t dropped_label = 0;

  std::string to_text() const;
  DropSummary& operator+=(const DropSummary& other);
};

// Keeps segments passing the SpO2 gate and the artifact rule, and (when a
// label requirement is given) whose task label is known. Order-preserving.
std::vector<Segment> filter_segments(const std::vector<Segment>& segments,
                                     LabelRequirement requirement,
                                     DropSummary* summary = nullptr);

}  // namespace apneakit
