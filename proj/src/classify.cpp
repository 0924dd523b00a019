#include "apneakit/classify.hpp"

#include <algorithm>
#include <cmath>

#include "apneakit/nn/train.hpp"

namespace apneakit {

std::optional<SleepState> sleep_state_of(Label stage) {
  switch (stage) {
    case Label::n1:
    case Label::n2:
    case Label::n3:
    case Label::n4:
    case Label::rem:
      return SleepState::sleep;
    case Label::wake:
      return SleepState::non_sleep;
    default:
      return std::nullopt;
  }
}

namespace {

ClassPrediction predict_binary(nn::Model<float>& model,
                               const nn::Tensor<float>& image) {
  if (model.num_classes != 2)
    fail(ErrorCode::model_missing, "binary classifier expected, model has " +
                                       std::to_string(model.num_classes) +
                                       " classes");
  const auto pred = nn::predict(model, image);
  ClassPrediction out;
  out.cls = pred.cls;
  out.prob = pred.probs[size_t(pred.cls)];
  out.positive_prob = pred.probs[1];
  return out;
}

}  // namespace

ClassPrediction classify_sleep(nn::Model<float>& model,
                               const FeatureSequences& seqs) {
  return predict_binary(model, sequences_to_image(seqs).cast<float>());
}

ClassPrediction classify_respiration(nn::Model<float>& model,
                                     const Spectrogram& spectrogram) {
  return predict_binary(model, spectrogram.values.cast<float>());
}

std::vector<ClassPrediction> classify_images(
    nn::Model<float>& model, const std::vector<nn::Tensor<float>>& images,
    int batch) {
  if (model.num_classes != 2)
    fail(ErrorCode::model_missing, "binary classifier expected");
  std::vector<ClassPrediction> out;
  out.reserve(images.size());
  for (size_t begin = 0; begin < images.size(); begin += size_t(batch)) {
    const size_t end = std::min(images.size(), begin + size_t(batch));
    const auto& first = images[begin];
    std::vector<int> shape = {int(end - begin)};
    shape.insert(shape.end(), first.shape.begin(), first.shape.end());
    nn::Tensor<float> x(shape);
    for (size_t i = begin; i < end; ++i)
      std::copy(images[i].data.begin(), images[i].data.end(),
                x.data.begin() + int64_t(i - begin) * first.size());
    nn::Tensor<float> probs = nn::softmax(model.forward(x, nn::Phase::infer));
    for (size_t i = 0; i < end - begin; ++i) {
      ClassPrediction p;
      p.cls = probs.at2(int(i), 1) > probs.at2(int(i), 0) ? 1 : 0;
      p.prob = double(probs.at2(int(i), p.cls));
      p.positive_prob = double(probs.at2(int(i), 1));
      out.push_back(p);
    }
  }
  return out;
}

namespace {

// Envelope and baseline are evaluated on a fixed 4 Hz grid so the sliding
// median stays cheap at any input rate.
constexpr double kGridDt = 0.25;
constexpr double kRmsHalfWindowS = 5.0;
constexpr double kBaselineHalfWindowS = 60.0;
constexpr double kDropFraction = 0.5;
// Boundary contour for seeded events; the RMS smoothing otherwise eats
// window/2 off each side of a genuine collapse.
constexpr double kExtendFraction = 0.75;
constexpr double kMinSeedS = 1.0;
constexpr double kMinEventS = 10.0;
constexpr double kMergeGapS = 5.0;
constexpr double kDesatPoints = 3.0;
constexpr double kDesatBaselineS = 30.0;
constexpr double kDesatSearchS = 30.0;

class SlidingMedian {
 public:
  void insert(double v) {
    window_.insert(std::upper_bound(window_.begin(), window_.end(), v), v);
  }
  void erase(double v) {
    auto it = std::lower_bound(window_.begin(), window_.end(), v);
    window_.erase(it);
  }
  double median() const {
    const size_t n = window_.size();
    return n % 2 == 1 ? window_[n / 2]
                      : 0.5 * (window_[n / 2 - 1] + window_[n / 2]);
  }

 private:
  std::vector<double> window_;
};

}  // namespace

std::vector<RespEvent> detect_events_rule(const std::vector<double>& respiration,
                                          double fs,
                                          const std::vector<double>* spo2,
                                          double spo2_fs) {
  const double duration_s = double(respiration.size()) / fs;
  if (duration_s < 120.0)
    fail(ErrorCode::signal_too_short,
         "rule detector needs >= 120 s of signal, got " +
             std::to_string(duration_s) + " s");

  // squared-signal prefix sums for O(1) window RMS
  std::vector<double> prefix_sq(respiration.size() + 1, 0.0);
  for (size_t i = 0; i < respiration.size(); ++i)
    prefix_sq[i + 1] = prefix_sq[i] + respiration[i] * respiration[i];

  const int grid_n = int(duration_s / kGridDt);
  std::vector<double> rms(static_cast<size_t>(grid_n));
  for (int gi = 0; gi < grid_n; ++gi) {
    const double t = (gi + 0.5) * kGridDt;
    const auto lo = size_t(std::max(0.0, std::floor((t - kRmsHalfWindowS) * fs)));
    const auto hi = std::min(respiration.size(),
                             size_t(std::ceil((t + kRmsHalfWindowS) * fs)));
    const double energy = prefix_sq[hi] - prefix_sq[lo];
    rms[size_t(gi)] = std::sqrt(energy / double(hi - lo));
  }

  // 120 s sliding median baseline over the grid
  const int half = int(kBaselineHalfWindowS / kGridDt);
  std::vector<double> baseline(static_cast<size_t>(grid_n));
  SlidingMedian median;
  int win_lo = 0, win_hi = -1;  // inclusive bounds currently in the median
  for (int gi = 0; gi < grid_n; ++gi) {
    const int want_lo = std::max(0, gi - half);
    const int want_hi = std::min(grid_n - 1, gi + half);
    while (win_hi < want_hi) median.insert(rms[size_t(++win_hi)]);
    while (win_lo < want_lo) median.erase(rms[size_t(win_lo++)]);
    baseline[size_t(gi)] = median.median();
  }

  // seed runs where the envelope drops below half the baseline, then walk
  // each boundary out to the 75% contour before applying the duration rule
  struct Run {
    int lo, hi;  // grid indices, inclusive
  };
  std::vector<Run> runs;
  int run_start = -1;
  for (int gi = 0; gi <= grid_n; ++gi) {
    const bool below =
        gi < grid_n && rms[size_t(gi)] < kDropFraction * baseline[size_t(gi)];
    if (below && run_start < 0) run_start = gi;
    if (!below && run_start >= 0) {
      if ((gi - run_start) * kGridDt >= kMinSeedS)
        runs.push_back({run_start, gi - 1});
      run_start = -1;
    }
  }
  for (auto& run : runs) {
    while (run.lo > 0 &&
           rms[size_t(run.lo) - 1] <
               kExtendFraction * baseline[size_t(run.lo) - 1])
      --run.lo;
    while (run.hi + 1 < grid_n &&
           rms[size_t(run.hi) + 1] <
               kExtendFraction * baseline[size_t(run.hi) + 1])
      ++run.hi;
  }

  // merge candidates separated by < 5 s, then keep those lasting >= 10 s
  std::vector<Run> merged;
  for (const auto& run : runs) {
    if (!merged.empty() && run.hi <= merged.back().hi) continue;
    if (!merged.empty() &&
        (run.lo - merged.back().hi - 1) * kGridDt < kMergeGapS) {
      merged.back().hi = run.hi;
    } else {
      merged.push_back(run);
    }
  }
  std::erase_if(merged, [](const Run& run) {
    return (run.hi - run.lo + 1) * kGridDt < kMinEventS;
  });

  std::vector<RespEvent> events;
  for (const auto& run : merged) {
    RespEvent event;
    event.start_s = run.lo * kGridDt;
    event.end_s = (run.hi + 1) * kGridDt;
    event.confirmed = true;
    if (spo2 && !spo2->empty() && spo2_fs > 0) {
      const auto sample_at = [&](double t) {
        const auto i = size_t(std::clamp(t * spo2_fs, 0.0,
                                         double(spo2->size() - 1)));
        return (*spo2)[i];
      };
      double base_sum = 0;
      int base_n = 0;
      for (double t = std::max(0.0, event.start_s - kDesatBaselineS);
           t < event.start_s; t += 1.0 / spo2_fs) {
        base_sum += sample_at(t);
        ++base_n;
      }
      const double base = base_n > 0 ? base_sum / base_n : sample_at(0.0);
      double min_after = base;
      const double search_end =
          std::min(double(spo2->size()) / spo2_fs, event.end_s + kDesatSearchS);
      for (double t = event.start_s; t < search_end; t += 1.0 / spo2_fs)
        min_after = std::min(min_after, sample_at(t));
      event.confirmed = base - min_after >= kDesatPoints;
    }
    events.push_back(event);
  }
  return events;
}

}  // namespace apneakit
