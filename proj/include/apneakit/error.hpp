#pragma once

#include <stdexcept>
#include <string>

namespace apneakit {

// Every failure mode the library can report. CLI exit codes are derived
// from these (see exit_code_for).
enum class ErrorCode {
  // configuration / CLI
  config_error,
  no_subjects,
  run_preprocess_first,
  // record & annotation loading
  missing_channel,
  length_mismatch,
  malformed_meta,
  non_finite_sample,
  unknown_label_token,
  non_monotonic_index,
  out_of_annotated_range,
  io_error,
  // preprocessing
  record_too_short,
  sample_rate_too_low,
  degenerate_segment,
  // feature extraction
  no_beats_detected,
  insufficient_beats,
  // nn engine
  shape_mismatch,
  degenerate_batch,
  empty_dataset,
  model_missing,
  // classification / ahi
  signal_too_short,
  zero_sleep_time,
  // metrics
  label_out_of_range,
  one_class_only,
  degenerate_variance,
};

const char* error_code_name(ErrorCode code);

// 2 = config error, 3 = data error, 4 = model error.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace apneakit
