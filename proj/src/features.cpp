#include "apneakit/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "apneakit/error.hpp"

namespace apneakit {

namespace {

constexpr int kMinBeatsPerSegment = 20;

std::vector<double> moving_mean(const std::vector<double>& x, int half_width) {
  const int n = int(x.size());
  std::vector<double> prefix(size_t(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[size_t(i) + 1] = prefix[size_t(i)] + x[size_t(i)];
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half_width);
    const int hi = std::min(n - 1, i + half_width);
    out[size_t(i)] = (prefix[size_t(hi) + 1] - prefix[size_t(lo)]) / double(hi - lo + 1);
  }
  return out;
}

int argmax_range(const std::vector<double>& x, int lo, int hi) {
  int best = lo;
  for (int i = lo + 1; i <= hi; ++i)
    if (x[size_t(i)] > x[size_t(best)]) best = i;
  return best;
}

int argmin_range(const std::vector<double>& x, int lo, int hi) {
  int best = lo;
  for (int i = lo + 1; i <= hi; ++i)
    if (x[size_t(i)] < x[size_t(best)]) best = i;
  return best;
}

// Local maxima of `signal` above `threshold(i)`, at least `min_gap` apart;
// closer pairs keep the taller peak.
template <typename ThresholdFn>
std::vector<int> thresholded_peaks(const std::vector<double>& signal,
                                   int min_gap, ThresholdFn threshold) {
  std::vector<int> peaks;
  const int n = int(signal.size());
  for (int i = 1; i + 1 < n; ++i) {
    const double v = signal[size_t(i)];
    if (v <= threshold(i)) continue;
    if (!(v > signal[size_t(i) - 1] && v >= signal[size_t(i) + 1])) continue;
    if (!peaks.empty() && i - peaks.back() < min_gap) {
      if (v > signal[size_t(peaks.back())]) peaks.back() = i;
      continue;
    }
    peaks.push_back(i);
  }
  return peaks;
}

}  // namespace

std::vector<QrsComplex> detect_qrs(const std::vector<double>& ecg, double fs) {
  if (!(fs >= 100.0))
    fail(ErrorCode::sample_rate_too_low,
         "QRS detection needs fs >= 100 Hz, got " + std::to_string(fs));
  const int n = int(ecg.size());
  if (n < int(fs))
    fail(ErrorCode::no_beats_detected, "segment shorter than one second");

  // derivative -> square -> moving integral (150 ms window)
  std::vector<double> feature(size_t(n), 0.0);
  for (int i = 1; i + 1 < n; ++i) {
    const double d = (ecg[size_t(i) + 1] - ecg[size_t(i) - 1]) * 0.5 * fs;
    feature[size_t(i)] = d * d;
  }
  const int integ_half = std::max(1, int(std::lround(0.075 * fs)));
  std::vector<double> mwi = moving_mean(feature, integ_half);

  // adaptive signal/noise levels per the classic scheme, primed on the
  // opening two seconds
  const int warmup = std::min(n - 1, int(std::lround(2.0 * fs)));
  double peak_max = 0.0, mean_level = 0.0;
  for (int i = 0; i <= warmup; ++i) {
    peak_max = std::max(peak_max, mwi[size_t(i)]);
    mean_level += mwi[size_t(i)];
  }
  mean_level /= double(warmup + 1);
  double signal_level = 0.5 * peak_max;
  double noise_level = 0.5 * mean_level;

  const int refractory = int(std::lround(0.2 * fs));
  const int search_half = int(std::lround(0.15 * fs));

  std::vector<int> beat_peaks;
  std::vector<double> recent_rr;
  int last_accepted = -refractory;

  const auto current_threshold = [&] {
    return noise_level + 0.25 * (signal_level - noise_level);
  };

  for (int i = 1; i + 1 < n; ++i) {
    const double v = mwi[size_t(i)];
    if (!(v > mwi[size_t(i) - 1] && v >= mwi[size_t(i) + 1])) continue;
    const bool above = v > current_threshold();
    if (above && i - last_accepted >= refractory) {
      beat_peaks.push_back(i);
      if (beat_peaks.size() > 1) {
        recent_rr.push_back(double(i - last_accepted));
        if (recent_rr.size() > 8) recent_rr.erase(recent_rr.begin());
      }
      last_accepted = i;
      signal_level = 0.125 * v + 0.875 * signal_level;
    } else if (!above) {
      noise_level = 0.125 * v + 0.875 * noise_level;
      // search back with a halved threshold when a beat is overdue
      if (!recent_rr.empty()) {
        double rr_mean = 0;
        for (double rr : recent_rr) rr_mean += rr;
        rr_mean /= double(recent_rr.size());
        if (double(i - last_accepted) > 1.66 * rr_mean &&
            v > 0.5 * current_threshold() && i - last_accepted >= refractory) {
          beat_peaks.push_back(i);
          recent_rr.push_back(double(i - last_accepted));
          if (recent_rr.size() > 8) recent_rr.erase(recent_rr.begin());
          last_accepted = i;
          signal_level = 0.25 * v + 0.75 * signal_level;
        }
      }
    }
  }

  // locate R as the ECG maximum near each integrator peak, then pick Q and S
  const int qs_win = std::max(1, int(std::lround(0.08 * fs)));
  std::vector<QrsComplex> beats;
  int last_r = -refractory;
  for (int peak : beat_peaks) {
    const int lo = std::max(1, peak - search_half);
    const int hi = std::min(n - 2, peak + search_half);
    if (lo >= hi) continue;
    const int r = argmax_range(ecg, lo, hi);
    if (r - last_r < refractory) {
      if (!beats.empty() && ecg[size_t(r)] > beats.back().r_amp) {
        beats.pop_back();
      } else {
        continue;
      }
    }
    QrsComplex beat;
    beat.r_index = r;
    beat.r_amp = ecg[size_t(r)];
    beat.time_s = double(r) / fs;
    beat.q_index = argmin_range(ecg, std::max(0, r - qs_win), r - 1);
    beat.q_amp = ecg[size_t(beat.q_index)];
    beat.s_index = argmin_range(ecg, r + 1, std::min(n - 1, r + qs_win));
    if (beat.q_amp > beat.r_amp) continue;  // not a QRS morphology
    beats.push_back(beat);
    last_r = beats.back().r_index;
  }

  if (int(beats.size()) < kMinBeatsPerSegment)
    fail(ErrorCode::no_beats_detected,
         "only " + std::to_string(beats.size()) + " beats detected");
  return beats;
}

EdrSignal derive_edr(const std::vector<QrsComplex>& qrs, double segment_len_s) {
  if (qrs.size() < 2)
    fail(ErrorCode::insufficient_beats,
         "EDR needs at least 2 beats, got " + std::to_string(qrs.size()));

  EdrSignal edr;
  edr.rate_hz = kEdrRateHz;
  edr.t0_s = 0.0;
  const int n = int(std::lround(segment_len_s * kEdrRateHz));
  edr.samples.resize(size_t(n));

  size_t k = 0;
  for (int i = 0; i < n; ++i) {
    const double t = double(i) / kEdrRateHz;
    while (k + 1 < qrs.size() && qrs[k + 1].time_s <= t) ++k;
    double value;
    if (t <= qrs.front().time_s) {
      value = qrs.front().r_amp;
    } else if (t >= qrs.back().time_s) {
      value = qrs.back().r_amp;
    } else {
      const auto& a = qrs[k];
      const auto& b = qrs[k + 1];
      const double w = (t - a.time_s) / (b.time_s - a.time_s);
      value = a.r_amp + w * (b.r_amp - a.r_amp);
    }
    edr.samples[size_t(i)] = value;
  }

  double mean = 0;
  for (double v : edr.samples) mean += v;
  mean /= double(n);
  for (double& v : edr.samples) v -= mean;
  return edr;
}

std::vector<int> edr_peak_indices(const EdrSignal& edr) {
  const int min_gap = int(std::lround(edr.rate_hz));  // 1 s separation
  return thresholded_peaks(edr.samples, min_gap,
                           [](int) { return -std::numeric_limits<double>::infinity(); });
}

FeatureSequences build_feature_sequences(const std::vector<QrsComplex>& qrs,
                                         const EdrSignal& edr) {
  FeatureSequences seqs;

  const auto fill = [](auto& dst, const std::vector<double>& src) {
    const size_t n = std::min(dst.size(), src.size());
    for (size_t i = 0; i < n; ++i) dst[i] = src[i];
  };

  std::vector<double> rr, q_amps, r_amps;
  for (size_t i = 0; i < qrs.size(); ++i) {
    if (i > 0) rr.push_back(qrs[i].time_s - qrs[i - 1].time_s);
    q_amps.push_back(qrs[i].q_amp);
    r_amps.push_back(qrs[i].r_amp);
  }
  fill(seqs.rr_intervals, rr);
  fill(seqs.q_amps, q_amps);
  fill(seqs.r_amps, r_amps);

  const auto peaks = edr_peak_indices(edr);
  std::vector<double> edr_amps, edr_gaps;
  for (size_t i = 0; i < peaks.size(); ++i) {
    edr_amps.push_back(edr.samples[size_t(peaks[i])]);
    if (i > 0)
      edr_gaps.push_back(double(peaks[i] - peaks[i - 1]) / edr.rate_hz);
  }
  fill(seqs.edr_amps, edr_amps);
  fill(seqs.edr_peak_intervals, edr_gaps);
  return seqs;
}

namespace {

// Bilinear resample with half-pixel centers; rows and columns are treated
// independently so a 1-pixel-tall source stays constant along that axis.
std::vector<double> resize_bilinear(const std::vector<double>& src, int src_h,
                                    int src_w, int dst_h, int dst_w) {
  std::vector<double> dst(size_t(dst_h) * dst_w);
  const double sy = double(src_h) / dst_h;
  const double sx = double(src_w) / dst_w;
  for (int y = 0; y < dst_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, double(src_h - 1));
    const int y0 = int(fy);
    const int y1 = std::min(src_h - 1, y0 + 1);
    const double wy = fy - y0;
    for (int x = 0; x < dst_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, double(src_w - 1));
      const int x0 = int(fx);
      const int x1 = std::min(src_w - 1, x0 + 1);
      const double wx = fx - x0;
      const double top = src[size_t(y0) * src_w + x0] * (1 - wx) +
                         src[size_t(y0) * src_w + x1] * wx;
      const double bot = src[size_t(y1) * src_w + x0] * (1 - wx) +
                         src[size_t(y1) * src_w + x1] * wx;
      dst[size_t(y) * dst_w + x] = top * (1 - wy) + bot * wy;
    }
  }
  return dst;
}

// Axis metadata resampled the same way the image rows/columns are.
std::vector<double> resize_axis(const std::vector<double>& src, int dst_n) {
  std::vector<double> dst(static_cast<size_t>(dst_n));
  const double s = double(src.size()) / dst_n;
  for (int i = 0; i < dst_n; ++i) {
    double f = (i + 0.5) * s - 0.5;
    f = std::clamp(f, 0.0, double(src.size() - 1));
    const int i0 = int(f);
    const int i1 = std::min(int(src.size()) - 1, i0 + 1);
    const double w = f - i0;
    dst[size_t(i)] = src[size_t(i0)] * (1 - w) + src[size_t(i1)] * w;
  }
  return dst;
}

void minmax_normalize(std::vector<double>& values) {
  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo <= 0.0) {
    std::fill(values.begin(), values.end(), 0.0);
    return;
  }
  for (double& v : values) v = (v - lo) / (hi - lo);
}

nn::Tensor<double> replicate_channels(const std::vector<double>& plane) {
  nn::Tensor<double> out({kImageSize, kImageSize, kImageChannels});
  for (int i = 0; i < kImageSize * kImageSize; ++i)
    for (int c = 0; c < kImageChannels; ++c)
      out.data[size_t(i) * kImageChannels + size_t(c)] = plane[size_t(i)];
  return out;
}

}  // namespace

Spectrogram edr_spectrogram(const EdrSignal& edr) {
  constexpr int kWindow = 32;
  constexpr int kHop = 4;
  const int n = int(edr.samples.size());
  if (n < kWindow)
    fail(ErrorCode::shape_mismatch,
         "EDR too short for spectrogram: " + std::to_string(n) + " samples");

  const int frames = (n - kWindow) / kHop + 1;
  const int bins = kWindow / 2 + 1;

  std::array<double, kWindow> hann;
  for (int k = 0; k < kWindow; ++k)
    hann[size_t(k)] =
        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / (kWindow - 1)));

  // magnitude per (bin, frame)
  std::vector<double> mag(size_t(bins) * frames, 0.0);
  for (int f = 0; f < frames; ++f) {
    for (int b = 0; b < bins; ++b) {
      double re = 0, im = 0;
      for (int k = 0; k < kWindow; ++k) {
        const double v = edr.samples[size_t(f * kHop + k)] * hann[size_t(k)];
        const double phase = -2.0 * std::numbers::pi * b * k / kWindow;
        re += v * std::cos(phase);
        im += v * std::sin(phase);
      }
      mag[size_t(b) * frames + f] = std::hypot(re, im);
    }
  }

  // dB relative to each frame's maximum, floored at -60 dB
  std::vector<double> db(mag.size(), -60.0);
  for (int f = 0; f < frames; ++f) {
    double frame_max = 0;
    for (int b = 0; b < bins; ++b)
      frame_max = std::max(frame_max, mag[size_t(b) * frames + f]);
    if (frame_max <= 0) continue;
    for (int b = 0; b < bins; ++b) {
      const double m = mag[size_t(b) * frames + f];
      const double rel = m > 0 ? 20.0 * std::log10(m / frame_max) : -60.0;
      db[size_t(b) * frames + f] = std::clamp(rel, -60.0, 0.0);
    }
  }

  minmax_normalize(db);
  std::vector<double> plane =
      resize_bilinear(db, bins, frames, kImageSize, kImageSize);

  Spectrogram spec;
  spec.values = replicate_channels(plane);
  std::vector<double> freq(static_cast<size_t>(bins)), time(static_cast<size_t>(frames));
  for (int b = 0; b < bins; ++b)
    freq[size_t(b)] = double(b) * edr.rate_hz / kWindow;
  for (int f = 0; f < frames; ++f)
    time[size_t(f)] =
        edr.t0_s + (double(f * kHop) + (kWindow - 1) / 2.0) / edr.rate_hz;
  spec.freq_axis = resize_axis(freq, kImageSize);
  spec.time_axis = resize_axis(time, kImageSize);
  return spec;
}

nn::Tensor<double> sequences_to_image(const FeatureSequences& seqs) {
  constexpr int kRows = 5;
  constexpr int kCols = FeatureSequences::kBeatLen;
  std::vector<double> grid(size_t(kRows) * kCols, 0.0);

  const auto put_row = [&](int row, const double* src, size_t len) {
    std::vector<double> values(src, src + len);
    values.resize(size_t(kCols), 0.0);
    minmax_normalize(values);
    std::copy(values.begin(), values.end(), grid.begin() + int64_t(row) * kCols);
  };
  put_row(0, seqs.rr_intervals.data(), seqs.rr_intervals.size());
  put_row(1, seqs.q_amps.data(), seqs.q_amps.size());
  put_row(2, seqs.r_amps.data(), seqs.r_amps.size());
  put_row(3, seqs.edr_amps.data(), seqs.edr_amps.size());
  put_row(4, seqs.edr_peak_intervals.data(), seqs.edr_peak_intervals.size());

  std::vector<double> plane =
      resize_bilinear(grid, kRows, kCols, kImageSize, kImageSize);
  return replicate_channels(plane);
}

}  // namespace apneakit
