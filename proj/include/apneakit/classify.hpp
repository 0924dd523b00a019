#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apneakit/features.hpp"
#include "apneakit/nn/layers.hpp"
#include "apneakit/signal_io.hpp"

namespace apneakit {

enum class SleepState : uint8_t { non_sleep = 0, sleep = 1 };

// Stage labels collapse to sleep/non-sleep; REM counts as sleep so it is not
// dropped from the AHI denominator. UNKNOWN stays unknown.
std::optional<SleepState> sleep_state_of(Label stage);

struct EpochPrediction {
  std::string subject_id;
  double start_s = 0.0;
  SleepState sleep = SleepState::non_sleep;
  double sleep_prob = 0.0;  // probability of the predicted sleep state
  Label resp = Label::unknown;
  double resp_prob = 0.0;  // probability of the predicted respiration state
};

// Class index conventions for the two binary heads.
inline constexpr int kSleepClassNonSleep = 0;
inline constexpr int kSleepClassSleep = 1;
inline constexpr int kRespClassNormal = 0;
inline constexpr int kRespClassApnea = 1;

struct ClassPrediction {
  int cls = 0;
  double prob = 0.0;        // probability of cls
  double positive_prob = 0.0;  // probability of class 1, for ROC scores
};

ClassPrediction classify_sleep(nn::Model<float>& model,
                               const FeatureSequences& seqs);
ClassPrediction classify_respiration(nn::Model<float>& model,
                                     const Spectrogram& spectrogram);

// Batched inference over prebuilt images (HWC float tensors).
std::vector<ClassPrediction> classify_images(
    nn::Model<float>& model, const std::vector<nn::Tensor<float>>& images,
    int batch = 32);

struct RespEvent {
  double start_s = 0.0;
  double end_s = 0.0;
  bool confirmed = false;  // SpO2 desaturation seen (or no SpO2 available)
};

// Candidate events where the 10 s moving RMS of the respiration proxy stays
// under half the 120 s moving-median baseline for at least 10 s; candidates
// separated by under 5 s merge. With SpO2 present, an event is confirmed by a
// >= 3-point drop from the 30 s pre-event baseline within 30 s after it.
std::vector<RespEvent> detect_events_rule(
    const std::vector<double>& respiration, double fs,
    const std::vector<double>* spo2 = nullptr, double spo2_fs = 0.0);

}  // namespace apneakit
