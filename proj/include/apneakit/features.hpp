#pragma once

#include <array>
#include <vector>

#include "apneakit/nn/tensor.hpp"

namespace apneakit {

struct QrsComplex {
  int q_index = 0;
  int r_index = 0;
  int s_index = 0;
  double q_amp = 0.0;
  double r_amp = 0.0;
  double time_s = 0.0;  // R peak time
};

struct EdrSignal {
  std::vector<double> samples;
  double rate_hz = 4.0;
  double t0_s = 0.0;
};

// Network input sequences. Shorter sequences are zero-padded at the tail,
// longer ones are tail-truncated.
struct FeatureSequences {
  static constexpr int kBeatLen = 200;
  static constexpr int kEdrLen = 100;
  std::array<double, kBeatLen> rr_intervals{};
  std::array<double, kBeatLen> q_amps{};
  std::array<double, kBeatLen> r_amps{};
  std::array<double, kEdrLen> edr_amps{};
  std::array<double, kEdrLen> edr_peak_intervals{};
};

struct Spectrogram {
  nn::Tensor<double> values;       // 96x96x3, values in [0, 1]
  std::vector<double> freq_axis;   // per output row, Hz
  std::vector<double> time_axis;   // per output column, s
};

inline constexpr int kImageSize = 96;
inline constexpr int kImageChannels = 3;
inline constexpr double kEdrRateHz = 4.0;

// R peaks via a derivative -> square -> moving-integral pipeline with an
// adaptive threshold and a 200 ms refractory period; Q and S are the minima
// in the 80 ms windows flanking each R. Throws no_beats_detected when fewer
// than 20 beats emerge from a segment.
std::vector<QrsComplex> detect_qrs(const std::vector<double>& ecg, double fs);

// R-amplitude series linearly resampled at 4 Hz over [0, segment_len_s),
// then mean-removed.
EdrSignal derive_edr(const std::vector<QrsComplex>& qrs, double segment_len_s);

FeatureSequences build_feature_sequences(const std::vector<QrsComplex>& qrs,
                                         const EdrSignal& edr);

// STFT of the EDR (Hann 32, hop 4), per-frame dB relative to the frame max
// clipped to [-60, 0], min-max normalized, bilinearly resized to 96x96 and
// replicated to 3 channels.
Spectrogram edr_spectrogram(const EdrSignal& edr);

// The five sequences stacked as rows (100-point rows tail-padded to 200),
// each row min-max normalized on its own, resized to 96x96x3.
nn::Tensor<double> sequences_to_image(const FeatureSequences& seqs);

// Local maxima of the EDR with at least 1 s separation, in time order.
std::vector<int> edr_peak_indices(const EdrSignal& edr);

}  // namespace apneakit
