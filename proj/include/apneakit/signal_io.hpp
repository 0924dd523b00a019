#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "apneakit/error.hpp"

namespace apneakit {

enum class ChannelKind : uint8_t { ecg, spo2, resp };
enum class Unit : uint8_t { millivolt, percent, arbitrary };

struct Channel {
  ChannelKind kind = ChannelKind::ecg;
  double sample_rate_hz = 0.0;
  Unit unit = Unit::arbitrary;
  std::vector<double> samples;

  double duration_s() const {
    return sample_rate_hz > 0 ? double(samples.size()) / sample_rate_hz : 0.0;
  }
};

struct SignalRecord {
  std::string subject_id;
  double duration_s = 0.0;
  std::vector<Channel> channels;

  // nullptr when the record has no channel of that kind
  const Channel* find(ChannelKind kind) const;
  const Channel& ecg() const;  // throws missing_channel
};

// One enum covers both annotation vocabularies; the track kind decides which
// subset is legal. UNKNOWN marks gaps and is never guessed away.
enum class Label : uint8_t {
  wake,
  n1,
  n2,
  n3,
  n4,
  rem,
  apnea,
  normal,
  unknown,
};

enum class LabelKind : uint8_t { stage, respiration };

struct AnnotationTrack {
  LabelKind kind = LabelKind::stage;
  double epoch_len_s = 30.0;
  std::vector<Label> labels;

  double span_s() const { return double(labels.size()) * epoch_len_s; }
  // A track covers a recording when it is at most one epoch short of it.
  bool covers(double duration_s) const {
    return span_s() >= duration_s - epoch_len_s - 1e-9;
  }
};

Label parse_label(std::string_view token, LabelKind kind);
std::string_view label_token(Label label);

// Record directory layout: meta.json (subject_id, duration_s, channels[]) plus
// one headerless single-column CSV per channel. See docs/data-format.md.
SignalRecord load_record(const std::filesystem::path& dir);
void write_record(const SignalRecord& record, const std::filesystem::path& dir);

// Annotation CSV: header line, then `epoch_index,label` rows with strictly
// increasing indices. Missing indices become UNKNOWN.
AnnotationTrack load_annotations(const std::filesystem::path& file,
                                 LabelKind kind);
AnnotationTrack load_annotations(const std::filesystem::path& file,
                                 LabelKind kind, double epoch_len_s);

// Stage tracks: majority over the epochs the window overlaps, ties resolved
// toward the earliest covered epoch. Respiration tracks: the epoch containing
// the window midpoint. Epochs past the end of the track count as UNKNOWN.
Label label_for_window(const AnnotationTrack& track, double start_s,
                       double len_s);

}  // namespace apneakit
