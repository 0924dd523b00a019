#include "apneakit/ahi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "apneakit/text.hpp"

namespace apneakit {

const char* severity_name(Severity severity) {
  switch (severity) {
    case Severity::normal: return "Normal";
    case Severity::mild: return "Mild";
    case Severity::moderate: return "Moderate";
    case Severity::severe: return "Severe";
  }
  return "?";
}

double sleep_time_hours(const std::vector<EpochPrediction>& predictions) {
  if (predictions.empty()) return 0.0;
  constexpr double kEpoch = 30.0;

  // votes per 30 s grid epoch: first = sleep, second = non-sleep
  std::map<int64_t, std::pair<int, int>> votes;
  for (const auto& pred : predictions) {
    const auto first = int64_t(std::floor(pred.start_s / kEpoch + 1e-9));
    const auto last =
        int64_t(std::ceil((pred.start_s + 60.0) / kEpoch - 1e-9)) - 1;
    for (int64_t e = first; e <= last; ++e) {
      auto& v = votes[e];
      (pred.sleep == SleepState::sleep ? v.first : v.second)++;
    }
  }
  int64_t sleep_epochs = 0;
  for (const auto& [epoch, v] : votes)
    if (v.first >= v.second) ++sleep_epochs;  // tie -> sleep
  return double(sleep_epochs) * kEpoch / 3600.0;
}

int64_t count_events_per_minute(
    const std::vector<EpochPrediction>& predictions) {
  int64_t count = 0;
  for (const auto& pred : predictions) {
    if (pred.resp != Label::apnea) continue;
    const auto start = int64_t(std::llround(pred.start_s));
    if (start % 60 == 0) ++count;
  }
  return count;
}

int64_t count_events(const std::vector<RespEvent>& events) {
  return int64_t(events.size());
}

double compute_ahi(int64_t event_count, double sleep_time_h) {
  if (sleep_time_h < kMinReliableSleepH)
    fail(ErrorCode::zero_sleep_time,
         "sleep time " + fmt_fixed(sleep_time_h, 3) + " h is below the " +
             fmt_fixed(kMinReliableSleepH, 1) + " h reliability floor");
  return double(event_count) / sleep_time_h;
}

Severity grade(double ahi) {
  if (ahi < 5.0) return Severity::normal;
  if (ahi < 15.0) return Severity::mild;
  if (ahi < 30.0) return Severity::moderate;
  return Severity::severe;
}

bool binary_risk(double ahi) { return ahi > 5.0; }

const char* AhiReport::csv_header() {
  return "subject,sleep_h,events,ahi,severity,risk,reliable";
}

std::string AhiReport::to_csv_row() const {
  std::ostringstream out;
  out << subject_id << ',' << fmt_fixed(sleep_time_h, 4) << ',' << event_count
      << ',';
  if (reliable)
    out << fmt_fixed(ahi, 4) << ',' << severity_name(severity) << ','
        << (risk ? 1 : 0) << ",1";
  else
    out << "nan,NA,NA,0";
  return out.str();
}

std::string AhiReport::to_text() const {
  std::ostringstream out;
  out << "subject:    " << subject_id << '\n'
      << "sleep time: " << fmt_fixed(sleep_time_h, 2) << " h\n"
      << "events:     " << event_count << '\n';
  if (reliable) {
    out << "AHI:        " << fmt_fixed(ahi, 2) << " events/h\n"
        << "severity:   " << severity_name(severity) << '\n'
        << "risk:       " << (risk ? "yes (AHI > 5)" : "no") << '\n';
  } else {
    out << "AHI:        UNRELIABLE (sleep time below "
        << fmt_fixed(kMinReliableSleepH, 1) << " h)\n";
  }
  return out.str();
}

AhiReport make_report(const std::string& subject_id,
                      const std::vector<EpochPrediction>& predictions,
                      EventCountMode mode,
                      const std::vector<RespEvent>* events) {
  AhiReport report;
  report.subject_id = subject_id;
  report.sleep_time_h = sleep_time_hours(predictions);
  report.event_count = mode == EventCountMode::per_minute
                           ? count_events_per_minute(predictions)
                           : count_events(events ? *events
                                                 : std::vector<RespEvent>{});
  try {
    report.ahi = compute_ahi(report.event_count, report.sleep_time_h);
    report.reliable = true;
    report.severity = grade(report.ahi);
    report.risk = binary_risk(report.ahi);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::zero_sleep_time) throw;
    report.reliable = false;
    report.ahi = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace apneakit
