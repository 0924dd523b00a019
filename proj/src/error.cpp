#include "apneakit/error.hpp"

namespace apneakit {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_error: return "config_error";
    case ErrorCode::no_subjects: return "no_subjects";
    case ErrorCode::run_preprocess_first: return "run_preprocess_first";
    case ErrorCode::missing_channel: return "missing_channel";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::malformed_meta: return "malformed_meta";
    case ErrorCode::non_finite_sample: return "non_finite_sample";
    case ErrorCode::unknown_label_token: return "unknown_label_token";
    case ErrorCode::non_monotonic_index: return "non_monotonic_index";
    case ErrorCode::out_of_annotated_range: return "out_of_annotated_range";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::record_too_short: return "record_too_short";
    case ErrorCode::sample_rate_too_low: return "sample_rate_too_low";
    case ErrorCode::degenerate_segment: return "degenerate_segment";
    case ErrorCode::no_beats_detected: return "no_beats_detected";
    case ErrorCode::insufficient_beats: return "insufficient_beats";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::degenerate_batch: return "degenerate_batch";
    case ErrorCode::empty_dataset: return "empty_dataset";
    case ErrorCode::model_missing: return "model_missing";
    case ErrorCode::signal_too_short: return "signal_too_short";
    case ErrorCode::zero_sleep_time: return "zero_sleep_time";
    case ErrorCode::label_out_of_range: return "label_out_of_range";
    case ErrorCode::one_class_only: return "one_class_only";
    case ErrorCode::degenerate_variance: return "degenerate_variance";
  }
  return "unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_error:
      return 2;
    case ErrorCode::model_missing:
    case ErrorCode::shape_mismatch:
    case ErrorCode::degenerate_batch:
    case ErrorCode::empty_dataset:
      return 4;
    default:
      return 3;
  }
}

}  // namespace apneakit
