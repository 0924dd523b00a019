#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace apneakit::testsupport {

namespace {

struct Wave {
  double amp;      // relative to beat amplitude
  double offset_s; // relative to R
  double sigma_s;
};

// P, Q, R, S, T as gaussians
constexpr Wave kWaves[] = {
    {0.12, -0.19, 0.022}, {-0.12, -0.035, 0.009}, {1.0, 0.0, 0.011},
    {-0.18, 0.035, 0.009}, {0.35, 0.30, 0.07},
};

}  // namespace

SynthEcg synth_ecg(const EcgSynthOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SynthEcg out;
  const double mean_rr = 60.0 / options.heart_rate_bpm;
  double t = 0.35;
  while (t < options.duration_s - 0.2) {
    const double amp =
        options.r_amp_mv *
        (1.0 + options.resp_mod_depth *
                   std::sin(2.0 * std::numbers::pi * options.resp_freq_hz * t));
    out.beat_times.push_back(t);
    out.beat_amps.push_back(amp);
    const double rr =
        std::clamp(mean_rr * (1.0 + options.rr_jitter * gauss(rng)),
                   0.33, 2.0);
    t += rr;
  }

  const auto n = size_t(std::llround(options.duration_s * options.fs));
  out.samples.assign(n, 0.0);
  for (size_t b = 0; b < out.beat_times.size(); ++b) {
    const double bt = out.beat_times[b];
    const double amp = out.beat_amps[b];
    for (const Wave& wave : kWaves) {
      const double center = bt + wave.offset_s;
      const int lo = std::max(
          0, int((center - 4 * wave.sigma_s) * options.fs));
      const int hi = std::min(
          int(n) - 1, int((center + 4 * wave.sigma_s) * options.fs) + 1);
      for (int i = lo; i <= hi; ++i) {
        const double dt = double(i) / options.fs - center;
        out.samples[size_t(i)] +=
            amp * wave.amp * std::exp(-dt * dt / (2 * wave.sigma_s * wave.sigma_s));
      }
    }
  }

  double signal_rms = 0.0;
  for (double v : out.samples) signal_rms += v * v;
  signal_rms = std::sqrt(signal_rms / double(n));
  const double noise_sd = signal_rms / std::pow(10.0, options.snr_db / 20.0);

  const double wander_phase = gauss(rng);
  for (size_t i = 0; i < n; ++i) {
    const double ts = double(i) / options.fs;
    out.samples[i] += options.baseline_wander_mv *
                          std::sin(2.0 * std::numbers::pi * 0.2 * ts +
                                   wander_phase) +
                      noise_sd * gauss(rng);
  }
  return out;
}

SynthNight synth_night(const NightPlan& plan) {
  std::mt19937_64 rng(plan.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const auto in_sleep = [&](double t) {
    for (const auto& [lo, hi] : plan.sleep_spans)
      if (t >= lo && t < hi) return true;
    return false;
  };
  const auto in_apnea = [&](double t) {
    for (double start : plan.apnea_minute_starts)
      if (t >= start && t < start + 60.0) return true;
    return false;
  };

  // beat train with state-dependent rate, jitter, and respiratory modulation
  std::vector<double> beat_times, beat_amps;
  const double sleep_hr = 55.0 + 4.0 * uniform(rng);
  const double wake_hr = 88.0 + 6.0 * uniform(rng);
  const double resp_freq = 0.24 + 0.08 * uniform(rng);
  double t = 0.35;
  while (t < plan.duration_s - 0.2) {
    const bool sleeping = in_sleep(t);
    const bool apneic = in_apnea(t);
    const double hr = sleeping ? sleep_hr : wake_hr;
    const double jitter = sleeping ? 0.015 : 0.12;
    // apnea replaces the breathing-band swing with a slow drift
    const double depth = apneic ? 0.10 : (sleeping ? 0.35 : 0.18);
    const double freq = apneic ? 0.05 : resp_freq;
    const double amp =
        1.0 + depth * std::sin(2.0 * std::numbers::pi * freq * t);
    beat_times.push_back(t);
    beat_amps.push_back(amp);
    const double rr = std::clamp(
        (60.0 / hr) * (1.0 + jitter * gauss(rng)), 0.33, 2.0);
    t += rr;
  }

  const auto n = size_t(std::llround(plan.duration_s * plan.ecg_fs));
  std::vector<double> ecg(n, 0.0);
  for (size_t b = 0; b < beat_times.size(); ++b) {
    for (const Wave& wave : kWaves) {
      const double center = beat_times[b] + wave.offset_s;
      const int lo = std::max(0, int((center - 4 * wave.sigma_s) * plan.ecg_fs));
      const int hi =
          std::min(int(n) - 1, int((center + 4 * wave.sigma_s) * plan.ecg_fs) + 1);
      for (int i = lo; i <= hi; ++i) {
        const double dt = double(i) / plan.ecg_fs - center;
        ecg[size_t(i)] += beat_amps[b] * wave.amp *
                          std::exp(-dt * dt / (2 * wave.sigma_s * wave.sigma_s));
      }
    }
  }
  for (size_t i = 0; i < n; ++i) {
    const double ts = double(i) / plan.ecg_fs;
    ecg[i] += 0.04 * std::sin(2.0 * std::numbers::pi * 0.2 * ts) +
              0.015 * gauss(rng);
  }

  // SpO2: steady 96-97% with a 4-point dip trailing each apnea minute
  const auto spo2_n = size_t(std::llround(plan.duration_s * plan.spo2_fs));
  std::vector<double> spo2(spo2_n, 96.5);
  for (size_t i = 0; i < spo2_n; ++i)
    spo2[i] += 0.3 * std::sin(2.0 * std::numbers::pi * double(i) / 313.0) +
               0.1 * gauss(rng);
  for (double start : plan.apnea_minute_starts) {
    const double dip_center = start + 70.0;  // desaturation lags the event
    for (size_t i = 0; i < spo2_n; ++i) {
      const double ts = double(i) / plan.spo2_fs;
      const double d = (ts - dip_center) / 12.0;
      spo2[i] -= 4.0 * std::exp(-d * d);
    }
  }
  for (double& v : spo2) v = std::clamp(v, 71.0, 100.0);

  SynthNight night;
  night.record.subject_id = plan.subject_id;
  night.record.duration_s = plan.duration_s;
  Channel ecg_ch;
  ecg_ch.kind = ChannelKind::ecg;
  ecg_ch.sample_rate_hz = plan.ecg_fs;
  ecg_ch.unit = Unit::millivolt;
  ecg_ch.samples = std::move(ecg);
  night.record.channels.push_back(std::move(ecg_ch));
  Channel spo2_ch;
  spo2_ch.kind = ChannelKind::spo2;
  spo2_ch.sample_rate_hz = plan.spo2_fs;
  spo2_ch.unit = Unit::percent;
  spo2_ch.samples = std::move(spo2);
  night.record.channels.push_back(std::move(spo2_ch));

  night.stages.kind = LabelKind::stage;
  night.stages.epoch_len_s = 30.0;
  const int stage_epochs = int(plan.duration_s / 30.0);
  for (int e = 0; e < stage_epochs; ++e) {
    const double mid = e * 30.0 + 15.0;
    night.stages.labels.push_back(in_sleep(mid) ? Label::n2 : Label::wake);
  }

  night.respiration.kind = LabelKind::respiration;
  night.respiration.epoch_len_s = 60.0;
  const int resp_epochs = int(plan.duration_s / 60.0);
  for (int e = 0; e < resp_epochs; ++e) {
    const double mid = e * 60.0 + 30.0;
    night.respiration.labels.push_back(in_apnea(mid) ? Label::apnea
                                                     : Label::normal);
  }

  int64_t sleep_epochs = 0;
  for (Label l : night.stages.labels)
    if (l != Label::wake) ++sleep_epochs;
  night.true_sleep_h = double(sleep_epochs) * 30.0 / 3600.0;
  night.true_events = int64_t(plan.apnea_minute_starts.size());
  night.true_ahi =
      night.true_sleep_h > 0 ? double(night.true_events) / night.true_sleep_h
                             : 0.0;
  return night;
}

NightPlan make_night_plan(const std::string& subject_id, double duration_s,
                          double target_ahi, uint64_t seed) {
  NightPlan plan;
  plan.subject_id = subject_id;
  plan.duration_s = duration_s;
  plan.seed = seed;

  // sleep from minute 10 to 10 minutes before the end, 30 s aligned
  const double sleep_start = 600.0;
  const double sleep_end = duration_s - 600.0;
  plan.sleep_spans.push_back({sleep_start, sleep_end});

  const double sleep_h = (sleep_end - sleep_start) / 3600.0;
  const auto events = int64_t(std::llround(target_ahi * sleep_h));

  // spread apnea minutes evenly over whole minutes inside the sleep span
  std::vector<double> minute_starts;
  for (double m = std::ceil(sleep_start / 60.0) * 60.0; m + 60.0 <= sleep_end;
       m += 60.0)
    minute_starts.push_back(m);
  if (events > 0 && !minute_starts.empty()) {
    const auto usable = int64_t(minute_starts.size());
    const auto count = std::min(events, usable);
    for (int64_t k = 0; k < count; ++k) {
      const auto idx = size_t((k * usable) / count);
      plan.apnea_minute_starts.push_back(minute_starts[idx]);
    }
    std::sort(plan.apnea_minute_starts.begin(), plan.apnea_minute_starts.end());
    plan.apnea_minute_starts.erase(
        std::unique(plan.apnea_minute_starts.begin(),
                    plan.apnea_minute_starts.end()),
        plan.apnea_minute_starts.end());
  }
  return plan;
}

}  // namespace apneakit::testsupport
