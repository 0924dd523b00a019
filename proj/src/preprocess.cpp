#include "apneakit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace apneakit {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;  // normalized (a0 = 1)
};

// Bilinear-transform biquads for one conjugate pole pair of a Butterworth
// prototype (quality factor q), cutoff prewarped via w0.
Biquad butter_lowpass_biquad(double fc, double fs, double q) {
  const double w0 = 2.0 * std::numbers::pi * fc / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  return {(1.0 - c) / 2.0 / a0, (1.0 - c) / a0, (1.0 - c) / 2.0 / a0,
          -2.0 * c / a0, (1.0 - alpha) / a0};
}

Biquad butter_highpass_biquad(double fc, double fs, double q) {
  const double w0 = 2.0 * std::numbers::pi * fc / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double c = std::cos(w0);
  const double a0 = 1.0 + alpha;
  return {(1.0 + c) / 2.0 / a0, -(1.0 + c) / a0, (1.0 + c) / 2.0 / a0,
          -2.0 * c / a0, (1.0 - alpha) / a0};
}

// Pole pair Q factors of the 4th-order Butterworth prototype.
constexpr double kButterQ4[2] = {0.541196100146197, 1.3065629648763764};

void apply_biquad(const Biquad& bq, std::vector<double>& x) {
  if (x.empty()) return;
  // steady-state initialization for the first sample removes step transients
  const double dc_gain = (bq.b0 + bq.b1 + bq.b2) / (1.0 + bq.a1 + bq.a2);
  double x1 = x.front(), x2 = x.front();
  double y1 = x.front() * dc_gain, y2 = x.front() * dc_gain;
  for (double& v : x) {
    const double x0 = v;
    const double y0 =
        bq.b0 * x0 + bq.b1 * x1 + bq.b2 * x2 - bq.a1 * y1 - bq.a2 * y2;
    x2 = x1;
    x1 = x0;
    y2 = y1;
    y1 = y0;
    v = y0;
  }
}

double median_inplace(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<double> bandpass_ecg(const std::vector<double>& raw, double fs) {
  if (!(fs > 90.0))
    fail(ErrorCode::sample_rate_too_low,
         "band-pass needs fs > 90 Hz, got " + std::to_string(fs));
  if (raw.empty()) return {};

  const Biquad sections[4] = {
      butter_highpass_biquad(0.3, fs, kButterQ4[0]),
      butter_highpass_biquad(0.3, fs, kButterQ4[1]),
      butter_lowpass_biquad(45.0, fs, kButterQ4[0]),
      butter_lowpass_biquad(45.0, fs, kButterQ4[1]),
  };

  const size_t n = raw.size();
  const size_t pad = std::min(n - 1, size_t(std::llround(3.0 * fs)));

  // Odd reflection at both ends keeps the extension continuous in value,
  // which suppresses the filter's startup transient.
  std::vector<double> ext(n + 2 * pad);
  for (size_t i = 0; i < pad; ++i)
    ext[i] = 2.0 * raw.front() - raw[pad - i];
  std::copy(raw.begin(), raw.end(), ext.begin() + pad);
  for (size_t i = 0; i < pad; ++i)
    ext[n + pad + i] = 2.0 * raw.back() - raw[n - 2 - i];

  for (const auto& bq : sections) apply_biquad(bq, ext);
  std::reverse(ext.begin(), ext.end());
  for (const auto& bq : sections) apply_biquad(bq, ext);
  std::reverse(ext.begin(), ext.end());

  std::vector<double> out(ext.begin() + pad, ext.begin() + pad + n);
  double mean = 0;
  for (double v : out) mean += v;
  mean /= double(n);
  for (double& v : out) v -= mean;
  return out;
}

bool spo2_valid(const std::vector<double>& spo2) {
  for (double s : spo2)
    if (!(s >= 70.0 && s <= 100.0)) return false;
  return true;
}

ArtifactVerdict ecg_artifact_flag(const std::vector<double>& ecg, double fs) {
  if (!(fs > 0))
    fail(ErrorCode::sample_rate_too_low, "non-positive sample rate");
  const size_t n = ecg.size();
  if (n < 6)
    fail(ErrorCode::degenerate_segment, "segment too short for artifact rule");

  std::vector<double> maxima, minima;
  maxima.reserve(6);
  minima.reserve(6);
  for (int i = 0; i < 6; ++i) {
    const size_t lo = size_t(std::llround(double(i) * double(n) / 6.0));
    const size_t hi = size_t(std::llround(double(i + 1) * double(n) / 6.0));
    double mx = ecg[lo], mn = ecg[lo];
    for (size_t j = lo; j < hi; ++j) {
      mx = std::max(mx, ecg[j]);
      mn = std::min(mn, ecg[j]);
    }
    maxima.push_back(mx);
    minima.push_back(mn);
  }

  ArtifactVerdict verdict;
  verdict.th1 = median_inplace(maxima);
  verdict.th2 = median_inplace(minima);
  if (!(verdict.th1 > 0.0 && verdict.th2 < 0.0))
    fail(ErrorCode::degenerate_segment,
         "flat or single-signed segment (th1=" + std::to_string(verdict.th1) +
             ", th2=" + std::to_string(verdict.th2) + ")");

  verdict.clean = true;
  for (double v : ecg) {
    if (v > 2.0 * verdict.th1 || v < 2.0 * verdict.th2) {
      verdict.clean = false;
      break;
    }
  }
  return verdict;
}

std::vector<Segment> segment_record(const SignalRecord& record,
                                    const AnnotationTrack* stages,
                                    const AnnotationTrack* respiration,
                                    double win_s, double stride_s) {
  if (record.duration_s < win_s)
    fail(ErrorCode::record_too_short,
         record.subject_id + ": " + std::to_string(record.duration_s) +
             " s record is shorter than the " + std::to_string(win_s) +
             " s window");
  const Channel& ecg_ch = record.ecg();
  const Channel* spo2_ch = record.find(ChannelKind::spo2);

  // filter the night once; slicing filtered windows avoids manufacturing
  // filter transients at every window boundary
  const std::vector<double> filtered =
      bandpass_ecg(ecg_ch.samples, ecg_ch.sample_rate_hz);

  const int count = int(std::floor((record.duration_s - win_s) / stride_s)) + 1;
  std::vector<Segment> segments;
  segments.reserve(size_t(count));

  for (int i = 0; i < count; ++i) {
    Segment seg;
    seg.subject_id = record.subject_id;
    seg.start_s = double(i) * stride_s;
    seg.len_s = win_s;
    seg.ecg_fs = ecg_ch.sample_rate_hz;

    const size_t e_lo = size_t(std::llround(seg.start_s * seg.ecg_fs));
    const size_t e_hi = std::min(
        filtered.size(),
        size_t(std::llround((seg.start_s + win_s) * seg.ecg_fs)));
    seg.ecg.assign(filtered.begin() + int64_t(e_lo),
                   filtered.begin() + int64_t(e_hi));
    double mean = 0.0;
    for (double v : seg.ecg) mean += v;
    mean /= double(seg.ecg.size());
    for (double& v : seg.ecg) v -= mean;
    try {
      const auto verdict = ecg_artifact_flag(seg.ecg, seg.ecg_fs);
      seg.quality.ecg_clean = verdict.clean;
      seg.quality.th1 = verdict.th1;
      seg.quality.th2 = verdict.th2;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_segment) throw;
      seg.quality.ecg_clean = false;
      seg.quality.th1 = 0.0;
      seg.quality.th2 = 0.0;
    }

    if (spo2_ch) {
      seg.spo2_fs = spo2_ch->sample_rate_hz;
      const size_t s_lo = size_t(std::llround(seg.start_s * seg.spo2_fs));
      const size_t s_hi = std::min(
          spo2_ch->samples.size(),
          size_t(std::llround((seg.start_s + win_s) * seg.spo2_fs)));
      seg.spo2.assign(spo2_ch->samples.begin() + s_lo,
                      spo2_ch->samples.begin() + s_hi);
    }
    seg.quality.spo2_valid = spo2_valid(seg.spo2);

    if (stages) seg.stage_label = label_for_window(*stages, seg.start_s, win_s);
    if (respiration)
      seg.resp_label = label_for_window(*respiration, seg.start_s, win_s);

    segments.push_back(std::move(seg));
  }
  return segments;
}

std::string DropSummary::to_text() const {
  std::ostringstream out;
  out << "retained " << retained << '\n'
      << "dropped_spo2 " << dropped_spo2 << '\n'
      << "dropped_ecg " << dropped_ecg << '\n'
      << "dropped_degenerate " << dropped_degenerate << '\n'
      << "dropped_label " << dropped_label << '\n';
  return out.str();
}

DropSummary& DropSummary::operator+=(const DropSummary& other) {
  retained += other.retained;
  dropped_spo2 += other.dropped_spo2;
  dropped_ecg += other.dropped_ecg;
  dropped_degenerate += other.dropped_degenerate;
  dropped_label += other.dropped_label;
  return *this;
}

std::vector<Segment> filter_segments(const std::vector<Segment>& segments,
                                     LabelRequirement requirement,
                                     DropSummary* summary) {
  DropSummary local;
  std::vector<Segment> retained;
  retained.reserve(segments.size());
  for (const auto& seg : segments) {
    if (!seg.quality.spo2_valid) {
      ++local.dropped_spo2;
      continue;
    }
    if (seg.quality.degenerate()) {
      ++local.dropped_degenerate;
      continue;
    }
    if (!seg.quality.ecg_clean) {
      ++local.dropped_ecg;
      continue;
    }
    const bool label_known =
        requirement == LabelRequirement::none ||
        (requirement == LabelRequirement::stage
             ? seg.stage_label != Label::unknown
             : seg.resp_label != Label::unknown);
    if (!label_known) {
      ++local.dropped_label;
      continue;
    }
    ++local.retained;
    retained.push_back(seg);
  }
  if (summary) *summary += local;
  return retained;
}

}  // namespace apneakit
