#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apneakit/classify.hpp"

namespace apneakit {

enum class Severity : uint8_t { normal, mild, moderate, severe };

const char* severity_name(Severity severity);

enum class EventCountMode : uint8_t { per_minute, events };

// Sleep time below this renders the AHI unreliable instead of huge.
inline constexpr double kMinReliableSleepH = 0.5;

// Per-window sleep calls are folded onto a 30 s epoch grid; each epoch takes
// the majority of the (at most two) windows covering it, ties going to sleep.
// Uncovered epochs count as non-sleep.
double sleep_time_hours(const std::vector<EpochPrediction>& predictions);

// Apnea-labeled whole-minute frames; only frames starting on even multiples
// of the 30 s stride count, so overlapping windows are not double-counted.
int64_t count_events_per_minute(const std::vector<EpochPrediction>& predictions);

int64_t count_events(const std::vector<RespEvent>& events);

// events per hour of sleep; throws zero_sleep_time below the 0.5 h floor.
double compute_ahi(int64_t event_count, double sleep_time_h);

// Normal [0,5), Mild [5,15), Moderate [15,30), Severe [30, inf).
Severity grade(double ahi);

// Strict: 5.0 is not at risk.
bool binary_risk(double ahi);

struct AhiReport {
  std::string subject_id;
  double sleep_time_h = 0.0;
  int64_t event_count = 0;
  bool reliable = false;
  double ahi = 0.0;            // meaningful only when reliable
  Severity severity = Severity::normal;
  bool risk = false;

  static const char* csv_header();
  std::string to_csv_row() const;
  std::string to_text() const;
};

AhiReport make_report(const std::string& subject_id,
                      const std::vector<EpochPrediction>& predictions,
                      EventCountMode mode,
                      const std::vector<RespEvent>* events = nullptr);

}  // namespace apneakit
