#include "apneakit/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "apneakit/text.hpp"
#include "json.hpp"

namespace apneakit {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ChannelKind parse_channel_kind(const std::string& name,
                               const std::filesystem::path& dir) {
  if (name == "ECG") return ChannelKind::ecg;
  if (name == "SPO2") return ChannelKind::spo2;
  if (name == "RESP") return ChannelKind::resp;
  fail(ErrorCode::malformed_meta,
       dir.string() + ": unknown channel name '" + name + "'");
}

const char* channel_kind_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::ecg: return "ECG";
    case ChannelKind::spo2: return "SPO2";
    case ChannelKind::resp: return "RESP";
  }
  return "?";
}

Unit parse_unit(const std::string& name, const std::filesystem::path& dir) {
  if (name == "millivolt") return Unit::millivolt;
  if (name == "percent") return Unit::percent;
  if (name == "arbitrary") return Unit::arbitrary;
  fail(ErrorCode::malformed_meta,
       dir.string() + ": unknown unit '" + name + "'");
}

const char* unit_name(Unit unit) {
  switch (unit) {
    case Unit::millivolt: return "millivolt";
    case Unit::percent: return "percent";
    case Unit::arbitrary: return "arbitrary";
  }
  return "?";
}

std::vector<double> load_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  std::vector<double> samples;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view token = trim(line);
    if (token.empty()) continue;
    auto value = parse_double(token);
    if (!value)
      fail(ErrorCode::non_finite_sample, path.string() + ":" +
                                             std::to_string(line_no) +
                                             ": unparseable sample");
    if (!std::isfinite(*value))
      fail(ErrorCode::non_finite_sample, path.string() + ":" +
                                             std::to_string(line_no) +
                                             ": non-finite sample");
    samples.push_back(*value);
  }
  return samples;
}

}  // namespace

const Channel* SignalRecord::find(ChannelKind kind) const {
  for (const auto& ch : channels)
    if (ch.kind == kind) return &ch;
  return nullptr;
}

const Channel& SignalRecord::ecg() const {
  const Channel* ch = find(ChannelKind::ecg);
  if (!ch) fail(ErrorCode::missing_channel, subject_id + ": no ECG channel");
  return *ch;
}

Label parse_label(std::string_view token, LabelKind kind) {
  token = trim(token);
  if (token == "UNKNOWN") return Label::unknown;
  if (kind == LabelKind::stage) {
    if (token == "W") return Label::wake;
    if (token == "N1") return Label::n1;
    if (token == "N2") return Label::n2;
    if (token == "N3") return Label::n3;
    if (token == "N4") return Label::n4;
    if (token == "REM") return Label::rem;
  } else {
    if (token == "A") return Label::apnea;
    if (token == "N") return Label::normal;
  }
  fail(ErrorCode::unknown_label_token,
       "unknown label token '" + std::string(token) + "'");
}

std::string_view label_token(Label label) {
  switch (label) {
    case Label::wake: return "W";
    case Label::n1: return "N1";
    case Label::n2: return "N2";
    case Label::n3: return "N3";
    case Label::n4: return "N4";
    case Label::rem: return "REM";
    case Label::apnea: return "A";
    case Label::normal: return "N";
    case Label::unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

SignalRecord load_record(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::malformed_meta, meta_path.string() + ": " + e.what());
  }

  SignalRecord record;
  try {
    record.subject_id = meta.at("subject_id").get<std::string>();
    record.duration_s = meta.at("duration_s").get<double>();
    for (const auto& ch_meta : meta.at("channels")) {
      Channel ch;
      ch.kind = parse_channel_kind(ch_meta.at("name").get<std::string>(), dir);
      ch.sample_rate_hz = ch_meta.at("sample_rate_hz").get<double>();
      ch.unit = parse_unit(ch_meta.at("unit").get<std::string>(), dir);
      if (!(ch.sample_rate_hz > 0))
        fail(ErrorCode::malformed_meta,
             meta_path.string() + ": sample_rate_hz must be positive");
      ch.samples = load_samples(dir / ch_meta.at("file").get<std::string>());
      record.channels.push_back(std::move(ch));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::malformed_meta, meta_path.string() + ": " + e.what());
  }

  if (!(record.duration_s > 0))
    fail(ErrorCode::malformed_meta,
         meta_path.string() + ": duration_s must be positive");

  std::map<ChannelKind, int> kind_counts;
  for (const auto& ch : record.channels) ++kind_counts[ch.kind];
  for (const auto& [kind, count] : kind_counts)
    if (count > 1)
      fail(ErrorCode::malformed_meta,
           meta_path.string() + ": duplicate channel " +
               std::string(channel_kind_name(kind)));

  if (!record.find(ChannelKind::ecg))
    fail(ErrorCode::missing_channel, dir.string() + ": no ECG channel");

  for (const auto& ch : record.channels) {
    const double expected = std::round(record.duration_s * ch.sample_rate_hz);
    const double tolerance = ch.sample_rate_hz * 0.5;
    if (std::abs(double(ch.samples.size()) - expected) > tolerance)
      fail(ErrorCode::length_mismatch,
           dir.string() + ": channel " + channel_kind_name(ch.kind) + " has " +
               std::to_string(ch.samples.size()) + " samples, expected " +
               std::to_string((long long)expected));
  }
  return record;
}

void write_record(const SignalRecord& record,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["subject_id"] = record.subject_id;
  meta["duration_s"] = record.duration_s;
  meta["channels"] = nlohmann::ordered_json::array();
  for (const auto& ch : record.channels) {
    std::string file = std::string(channel_kind_name(ch.kind));
    std::transform(file.begin(), file.end(), file.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    file += ".csv";
    meta["channels"].push_back({{"name", channel_kind_name(ch.kind)},
                                {"sample_rate_hz", ch.sample_rate_hz},
                                {"unit", unit_name(ch.unit)},
                                {"file", file}});
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write " + (dir / file).string());
    for (double v : ch.samples) out << fmt_shortest(v) << '\n';
  }
  std::ofstream out(dir / "meta.json", std::ios::binary);
  if (!out)
    fail(ErrorCode::io_error, "cannot write " + (dir / "meta.json").string());
  out << meta.dump(2) << '\n';
}

AnnotationTrack load_annotations(const std::filesystem::path& file,
                                 LabelKind kind) {
  return load_annotations(file, kind,
                          kind == LabelKind::stage ? 30.0 : 60.0);
}

AnnotationTrack load_annotations(const std::filesystem::path& file,
                                 LabelKind kind, double epoch_len_s) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + file.string());

  AnnotationTrack track;
  track.kind = kind;
  track.epoch_len_s = epoch_len_s;

  std::string line;
  std::getline(in, line);  // header
  long long last_index = -1;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != 2)
      fail(ErrorCode::unknown_label_token,
           file.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
    auto index = parse_int(fields[0]);
    if (!index || *index < 0)
      fail(ErrorCode::non_monotonic_index,
           file.string() + ":" + std::to_string(line_no) + ": bad epoch index");
    if (*index <= last_index)
      fail(ErrorCode::non_monotonic_index,
           file.string() + ":" + std::to_string(line_no) +
               ": epoch index not increasing");
    Label label = parse_label(fields[1], kind);
    track.labels.resize(size_t(*index), Label::unknown);
    track.labels.push_back(label);
    last_index = *index;
  }
  return track;
}

Label label_for_window(const AnnotationTrack& track, double start_s,
                       double len_s) {
  const double epoch = track.epoch_len_s;
  const double span = track.span_s();
  if (!(len_s > 0) || start_s < -1e-9 || start_s >= span - 1e-9)
    fail(ErrorCode::out_of_annotated_range,
         "window at " + fmt_shortest(start_s) + "s outside annotated span of " +
             fmt_shortest(span) + "s");

  const auto label_at = [&](long long idx) {
    return idx >= 0 && idx < (long long)track.labels.size()
               ? track.labels[size_t(idx)]
               : Label::unknown;
  };

  if (track.kind == LabelKind::respiration) {
    const double mid = start_s + len_s / 2.0;
    return label_at((long long)std::floor(mid / epoch + 1e-9));
  }

  const long long first = (long long)std::floor(start_s / epoch + 1e-9);
  const long long last =
      (long long)std::ceil((start_s + len_s) / epoch - 1e-9) - 1;

  // Majority vote; scanning in epoch order and requiring a strict improvement
  // makes ties fall to the earliest epoch's label.
  std::vector<std::pair<Label, int>> counts;
  for (long long idx = first; idx <= last; ++idx) {
    Label l = label_at(idx);
    auto it = std::find_if(counts.begin(), counts.end(),
                           [&](const auto& p) { return p.first == l; });
    if (it == counts.end())
      counts.emplace_back(l, 1);
    else
      ++it->second;
  }
  Label best = Label::unknown;
  int best_count = 0;
  for (const auto& [label, count] : counts) {
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

}  // namespace apneakit
