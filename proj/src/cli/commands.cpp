#include "apneakit/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "apneakit/ahi.hpp"
#include "apneakit/classify.hpp"
#include "apneakit/cli/plots.hpp"
#include "apneakit/metrics.hpp"
#include "apneakit/nn/parallel.hpp"
#include "apneakit/nn/train.hpp"
#include "apneakit/nn/weights_io.hpp"
#include "apneakit/preprocess.hpp"
#include "apneakit/text.hpp"

namespace apneakit::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> list_subjects(const fs::path& data_dir) {
  std::vector<std::string> subjects;
  if (fs::is_directory(data_dir)) {
    for (const auto& entry : fs::directory_iterator(data_dir))
      if (entry.is_directory() && fs::exists(entry.path() / "meta.json"))
        subjects.push_back(entry.path().filename().string());
  }
  std::sort(subjects.begin(), subjects.end());
  return subjects;
}

std::vector<std::string> list_cached_subjects(const fs::path& cache_dir) {
  std::vector<std::string> subjects;
  if (fs::is_directory(cache_dir)) {
    for (const auto& entry : fs::directory_iterator(cache_dir))
      if (entry.path().extension() == ".feat")
        subjects.push_back(entry.path().stem().string());
  }
  std::sort(subjects.begin(), subjects.end());
  return subjects;
}

void write_text_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
}

EdrSignal edr_from_cache(const CachedSegment& seg) {
  EdrSignal edr;
  edr.rate_hz = kEdrRateHz;
  edr.t0_s = seg.start_s;
  edr.samples.assign(seg.edr.begin(), seg.edr.end());
  return edr;
}

// ----- preprocess ---------------------------------------------------------

struct PreprocessStats {
  DropSummary drops;
  int64_t dropped_features = 0;
  int64_t windows = 0;
};

SubjectCache preprocess_subject(const fs::path& subject_dir,
                                PreprocessStats& stats) {
  const SignalRecord record = load_record(subject_dir);

  AnnotationTrack stages, respiration;
  const AnnotationTrack* stages_ptr = nullptr;
  const AnnotationTrack* resp_ptr = nullptr;
  if (fs::exists(subject_dir / "stages.csv")) {
    stages = load_annotations(subject_dir / "stages.csv", LabelKind::stage);
    stages_ptr = &stages;
  }
  if (fs::exists(subject_dir / "respiration.csv")) {
    respiration = load_annotations(subject_dir / "respiration.csv",
                                   LabelKind::respiration);
    resp_ptr = &respiration;
  }

  auto segments = segment_record(record, stages_ptr, resp_ptr);
  stats.windows += int64_t(segments.size());
  auto clean = filter_segments(segments, LabelRequirement::none, &stats.drops);

  SubjectCache cache;
  cache.subject_id = record.subject_id;
  cache.ecg_fs = record.ecg().sample_rate_hz;

  // feature extraction per segment; slots stay empty on failure
  std::vector<std::optional<CachedSegment>> slots(clean.size());
  nn::parallel_for(0, int64_t(clean.size()), [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      const Segment& seg = clean[size_t(i)];
      try {
        const auto qrs = detect_qrs(seg.ecg, seg.ecg_fs);
        const auto edr = derive_edr(qrs, seg.len_s);
        CachedSegment entry;
        entry.start_s = seg.start_s;
        entry.stage_label = seg.stage_label;
        entry.resp_label = seg.resp_label;
        entry.seqs = build_feature_sequences(qrs, edr);
        entry.edr.assign(edr.samples.begin(), edr.samples.end());
        slots[size_t(i)] = std::move(entry);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::no_beats_detected &&
            e.code() != ErrorCode::insufficient_beats)
          throw;
      }
    }
  });
  for (auto& slot : slots) {
    if (slot)
      cache.segments.push_back(std::move(*slot));
    else
      ++stats.dropped_features;
  }
  return cache;
}

// One flattened row per segment: labels, then the five sequences in order.
std::string features_csv(const SubjectCache& cache) {
  std::ostringstream out;
  out << "subject,start_s,stage,resp";
  const auto header_block = [&](const char* name, size_t n) {
    for (size_t i = 0; i < n; ++i) out << ',' << name << i;
  };
  header_block("rr", FeatureSequences::kBeatLen);
  header_block("q", FeatureSequences::kBeatLen);
  header_block("r", FeatureSequences::kBeatLen);
  header_block("edr_amp", FeatureSequences::kEdrLen);
  header_block("edr_gap", FeatureSequences::kEdrLen);
  out << '\n';
  for (const auto& seg : cache.segments) {
    out << cache.subject_id << ',' << fmt_fixed(seg.start_s, 1) << ','
        << label_token(seg.stage_label) << ',' << label_token(seg.resp_label);
    const auto block = [&](const double* values, size_t n) {
      for (size_t i = 0; i < n; ++i) out << ',' << fmt_fixed(values[i], 6);
    };
    block(seg.seqs.rr_intervals.data(), seg.seqs.rr_intervals.size());
    block(seg.seqs.q_amps.data(), seg.seqs.q_amps.size());
    block(seg.seqs.r_amps.data(), seg.seqs.r_amps.size());
    block(seg.seqs.edr_amps.data(), seg.seqs.edr_amps.size());
    block(seg.seqs.edr_peak_intervals.data(),
          seg.seqs.edr_peak_intervals.size());
    out << '\n';
  }
  return out.str();
}

// ----- training data ------------------------------------------------------

struct LabeledImages {
  nn::Dataset<float> train;
  nn::Dataset<float> val;
};

nn::Tensor<float> image_for_task(const CachedSegment& seg,
                                 const std::string& task) {
  if (task == "sleep") return sequences_to_image(seg.seqs).cast<float>();
  return edr_spectrogram(edr_from_cache(seg)).values.cast<float>();
}

std::optional<int> class_for_task(const CachedSegment& seg,
                                  const std::string& task) {
  if (task == "sleep") {
    const auto state = sleep_state_of(seg.stage_label);
    if (!state) return std::nullopt;
    return *state == SleepState::sleep ? kSleepClassSleep : kSleepClassNonSleep;
  }
  if (seg.resp_label == Label::apnea) return kRespClassApnea;
  if (seg.resp_label == Label::normal) return kRespClassNormal;
  return std::nullopt;
}

LabeledImages build_datasets(const RunConfig& config, const std::string& task,
                             std::ostream& out) {
  const auto subjects = list_cached_subjects(config.cache_dir());
  if (subjects.empty())
    fail(ErrorCode::run_preprocess_first,
         "no feature caches under " + config.cache_dir().string() +
             "; run preprocess first");

  LabeledImages data;
  for (const auto& subject : subjects) {
    const auto cache = read_cache(config.cache_dir() / (subject + ".feat"));
    const bool in_val =
        subject_in_validation(subject, config.val_percent, config.split_salt);
    nn::Dataset<float>& dst = in_val ? data.val : data.train;
    for (const auto& seg : cache.segments) {
      const auto cls = class_for_task(seg, task);
      if (!cls) continue;
      dst.inputs.push_back(image_for_task(seg, task));
      dst.labels.push_back(*cls);
    }
  }
  out << "task " << task << ": " << data.train.size() << " train / "
      << data.val.size() << " val segments\n";
  return data;
}

// ----- prediction ---------------------------------------------------------

struct SubjectPrediction {
  std::vector<EpochPrediction> epochs;
  std::vector<RespEvent> events;  // events mode only
  AhiReport report;
};

std::vector<EpochPrediction> classify_cache(nn::Model<float>& sleep_model,
                                            nn::Model<float>& resp_model,
                                            const SubjectCache& cache,
                                            int batch) {
  std::vector<nn::Tensor<float>> sleep_images, resp_images;
  sleep_images.reserve(cache.segments.size());
  resp_images.reserve(cache.segments.size());
  for (const auto& seg : cache.segments) {
    sleep_images.push_back(sequences_to_image(seg.seqs).cast<float>());
    resp_images.push_back(
        edr_spectrogram(edr_from_cache(seg)).values.cast<float>());
  }
  const auto sleep_preds = classify_images(sleep_model, sleep_images, batch);
  const auto resp_preds = classify_images(resp_model, resp_images, batch);

  std::vector<EpochPrediction> epochs;
  epochs.reserve(cache.segments.size());
  for (size_t i = 0; i < cache.segments.size(); ++i) {
    EpochPrediction pred;
    pred.subject_id = cache.subject_id;
    pred.start_s = cache.segments[i].start_s;
    pred.sleep = sleep_preds[i].cls == kSleepClassSleep ? SleepState::sleep
                                                        : SleepState::non_sleep;
    pred.sleep_prob = sleep_preds[i].prob;
    pred.resp =
        resp_preds[i].cls == kRespClassApnea ? Label::apnea : Label::normal;
    pred.resp_prob = resp_preds[i].prob;
    epochs.push_back(pred);
  }
  return epochs;
}

// Night-long respiration proxy for the rule detector: the belt channel when
// recorded, otherwise the cached per-minute EDR stitched over even-start
// windows. Events overlapping unstitched gaps are dropped.
std::vector<RespEvent> rule_events_for_subject(const RunConfig& config,
                                               const std::string& subject,
                                               const SubjectCache& cache) {
  const fs::path subject_dir = config.data_dir / subject;
  const SignalRecord record = load_record(subject_dir);
  const Channel* belt = record.find(ChannelKind::resp);
  const Channel* spo2 = record.find(ChannelKind::spo2);
  const std::vector<double>* spo2_samples = spo2 ? &spo2->samples : nullptr;
  const double spo2_fs = spo2 ? spo2->sample_rate_hz : 0.0;

  if (belt)
    return detect_events_rule(belt->samples, belt->sample_rate_hz,
                              spo2_samples, spo2_fs);

  const auto n = size_t(std::llround(record.duration_s * kEdrRateHz));
  std::vector<double> proxy(n, 0.0);
  std::vector<bool> covered(n, false);
  for (const auto& seg : cache.segments) {
    if (std::llround(seg.start_s) % 60 != 0) continue;
    const auto offset = size_t(std::llround(seg.start_s * kEdrRateHz));
    for (size_t i = 0; i < seg.edr.size() && offset + i < n; ++i) {
      proxy[offset + i] = double(seg.edr[i]);
      covered[offset + i] = true;
    }
  }
  auto events = detect_events_rule(proxy, kEdrRateHz, spo2_samples, spo2_fs);
  std::erase_if(events, [&](const RespEvent& event) {
    const auto lo = size_t(std::clamp(event.start_s * kEdrRateHz, 0.0,
                                      double(n - 1)));
    const auto hi = size_t(std::clamp(event.end_s * kEdrRateHz, 0.0,
                                      double(n - 1)));
    for (size_t i = lo; i <= hi; ++i)
      if (!covered[i]) return true;
    return false;
  });
  return events;
}

SubjectPrediction predict_subject(const RunConfig& config,
                                  const std::string& subject,
                                  nn::Model<float>& sleep_model,
                                  nn::Model<float>& resp_model) {
  const auto cache = read_cache(config.cache_dir() / (subject + ".feat"));
  SubjectPrediction result;
  result.epochs =
      classify_cache(sleep_model, resp_model, cache, config.batch);
  if (config.event_mode == EventCountMode::events) {
    auto all_events = rule_events_for_subject(config, subject, cache);
    for (const auto& event : all_events)
      if (event.confirmed) result.events.push_back(event);
    result.report = make_report(subject, result.epochs, EventCountMode::events,
                                &result.events);
  } else {
    result.report =
        make_report(subject, result.epochs, EventCountMode::per_minute);
  }
  return result;
}

nn::Model<float> load_model_file(const fs::path& path) {
  if (!fs::exists(path))
    fail(ErrorCode::model_missing,
         path.string() + ": model weights not found; run train first");
  auto model = nn::build_mobilenet_v2<float>(2, /*seed=*/0);
  nn::load_weights(model, path);
  return model;
}

std::string predictions_csv(const std::vector<EpochPrediction>& epochs) {
  std::ostringstream out;
  out << "subject,start_s,sleep_label,sleep_prob,resp_label,resp_prob\n";
  for (const auto& e : epochs) {
    out << e.subject_id << ',' << fmt_fixed(e.start_s, 1) << ','
        << (e.sleep == SleepState::sleep ? "S" : "NS") << ','
        << fmt_fixed(e.sleep_prob, 6) << ',' << label_token(e.resp) << ','
        << fmt_fixed(e.resp_prob, 6) << '\n';
  }
  return out.str();
}

std::string events_csv(const std::string& subject,
                       const std::vector<RespEvent>& events) {
  std::ostringstream out;
  out << "subject,start_s,end_s,confirmed\n";
  for (const auto& e : events)
    out << subject << ',' << fmt_fixed(e.start_s, 2) << ','
        << fmt_fixed(e.end_s, 2) << ',' << (e.confirmed ? 1 : 0) << '\n';
  return out.str();
}

// True AHI from the annotation tracks: 30 s sleep epochs and 60 s 'A'
// epochs, graded by the same formulas as predictions.
struct TruthAhi {
  double sleep_h = 0.0;
  int64_t events = 0;
  bool reliable = false;
  double ahi = 0.0;
};

TruthAhi truth_ahi_for_subject(const fs::path& subject_dir) {
  TruthAhi truth;
  if (!fs::exists(subject_dir / "stages.csv") ||
      !fs::exists(subject_dir / "respiration.csv"))
    return truth;
  const auto stages =
      load_annotations(subject_dir / "stages.csv", LabelKind::stage);
  const auto resp = load_annotations(subject_dir / "respiration.csv",
                                     LabelKind::respiration);
  int64_t sleep_epochs = 0;
  for (Label l : stages.labels)
    if (sleep_state_of(l) == SleepState::sleep) ++sleep_epochs;
  truth.sleep_h = double(sleep_epochs) * stages.epoch_len_s / 3600.0;
  for (Label l : resp.labels)
    if (l == Label::apnea) ++truth.events;
  if (truth.sleep_h >= kMinReliableSleepH) {
    truth.reliable = true;
    truth.ahi = double(truth.events) / truth.sleep_h;
  }
  return truth;
}

}  // namespace

int cmd_preprocess(const RunConfig& config, std::ostream& out) {
  nn::set_num_threads(config.workers);
  const auto subjects = list_subjects(config.data_dir);
  if (subjects.empty())
    fail(ErrorCode::no_subjects,
         "no subject directories under " + config.data_dir.string());

  fs::create_directories(config.cache_dir());
  PreprocessStats stats;
  for (const auto& subject : subjects) {
    PreprocessStats subject_stats;
    const auto cache =
        preprocess_subject(config.data_dir / subject, subject_stats);
    write_cache(config.cache_dir() / (subject + ".feat"), cache);
    if (config.dump_features)
      write_text_file(config.out_dir / "features" / (subject + ".csv"),
                      features_csv(cache));
    out << subject << ": " << cache.segments.size() << "/"
        << subject_stats.windows << " windows cached\n";
    stats.drops += subject_stats.drops;
    stats.dropped_features += subject_stats.dropped_features;
    stats.windows += subject_stats.windows;
  }

  std::ostringstream summary;
  summary << stats.drops.to_text() << "dropped_features "
          << stats.dropped_features << '\n';
  out << summary.str();
  write_text_file(config.out_dir / "cache" / "summary.txt", summary.str());
  return 0;
}

int cmd_train(const RunConfig& config, const std::string& task,
              std::ostream& out) {
  if (task != "sleep" && task != "resp")
    fail(ErrorCode::config_error, "unknown task '" + task + "'");
  nn::set_num_threads(config.workers);

  const auto data = build_datasets(config, task, out);
  if (data.train.size() == 0)
    fail(ErrorCode::empty_dataset, "no labeled training segments for " + task);

  auto model = nn::build_mobilenet_v2<float>(2, config.seed);
  nn::TrainOptions options;
  options.epochs = config.epochs;
  options.batch = config.batch;
  options.lr = config.lr;
  options.seed = config.seed;
  const auto result = nn::train(model, data.train, data.val, options);

  const fs::path model_path = task == "sleep" ? config.sleep_model_path()
                                              : config.resp_model_path();
  fs::create_directories(model_path.parent_path());
  nn::save_weights(model, model_path);

  std::ostringstream log;
  log << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  for (const auto& entry : result.log)
    log << entry.epoch << ',' << fmt_fixed(entry.train_loss, 6) << ','
        << fmt_fixed(entry.train_acc, 6) << ',' << fmt_fixed(entry.val_loss, 6)
        << ',' << fmt_fixed(entry.val_acc, 6) << '\n';
  write_text_file(config.out_dir / ("train_" + task + ".csv"), log.str());

  out << "saved " << model_path.string() << " (best epoch "
      << result.best_epoch << ", val_acc " << fmt_fixed(result.best_val_acc, 4)
      << ", checksum " << nn::weights_checksum(model) << ")\n";
  return 0;
}

int cmd_predict(const RunConfig& config, const std::string& subject,
                std::ostream& out) {
  if (subject.empty())
    fail(ErrorCode::config_error, "predict needs --subject");
  nn::set_num_threads(config.workers);

  auto sleep_model = load_model_file(config.sleep_model_path());
  auto resp_model = load_model_file(config.resp_model_path());
  const auto prediction =
      predict_subject(config, subject, sleep_model, resp_model);

  write_text_file(config.out_dir / "predictions" / (subject + ".csv"),
                  predictions_csv(prediction.epochs));
  if (config.event_mode == EventCountMode::events)
    write_text_file(config.out_dir / "events" / (subject + ".csv"),
                    events_csv(subject, prediction.events));
  write_text_file(config.out_dir / "reports" / (subject + ".txt"),
                  prediction.report.to_text());
  write_text_file(
      config.out_dir / "reports" / (subject + ".csv"),
      std::string(AhiReport::csv_header()) + "\n" +
          prediction.report.to_csv_row() + "\n");

  out << prediction.report.to_text();
  return 0;
}

int cmd_evaluate(const RunConfig& config, std::ostream& out) {
  nn::set_num_threads(config.workers);
  const auto subjects = list_cached_subjects(config.cache_dir());
  if (subjects.empty())
    fail(ErrorCode::run_preprocess_first,
         "no feature caches under " + config.cache_dir().string());

  auto sleep_model = load_model_file(config.sleep_model_path());
  auto resp_model = load_model_file(config.resp_model_path());

  // frame-level collections
  std::vector<int> resp_pred, resp_truth, sleep_pred, sleep_truth;
  std::vector<double> resp_scores;
  std::vector<int> resp_score_labels;

  // subject-level collections
  std::vector<std::string> eval_subjects;
  std::vector<double> true_ahi, pred_ahi;
  std::vector<int> severity_pred, severity_truth, risk_pred, risk_truth;
  int skipped_subjects = 0;

  for (const auto& subject : subjects) {
    const auto cache = read_cache(config.cache_dir() / (subject + ".feat"));
    const auto epochs =
        classify_cache(sleep_model, resp_model, cache, config.batch);
    for (size_t i = 0; i < cache.segments.size(); ++i) {
      const auto& seg = cache.segments[i];
      const auto& pred = epochs[i];
      if (seg.resp_label == Label::apnea || seg.resp_label == Label::normal) {
        const int truth = seg.resp_label == Label::apnea ? 1 : 0;
        const int predicted = pred.resp == Label::apnea ? 1 : 0;
        resp_pred.push_back(predicted);
        resp_truth.push_back(truth);
        resp_scores.push_back(predicted == 1 ? pred.resp_prob
                                             : 1.0 - pred.resp_prob);
        resp_score_labels.push_back(truth);
      }
      const auto stage_state = sleep_state_of(seg.stage_label);
      if (stage_state) {
        sleep_truth.push_back(*stage_state == SleepState::sleep ? 1 : 0);
        sleep_pred.push_back(pred.sleep == SleepState::sleep ? 1 : 0);
      }
    }

    const auto truth = truth_ahi_for_subject(config.data_dir / subject);
    AhiReport report;
    if (config.event_mode == EventCountMode::events) {
      auto prediction =
          predict_subject(config, subject, sleep_model, resp_model);
      report = prediction.report;
    } else {
      report = make_report(subject, epochs, EventCountMode::per_minute);
    }
    if (!truth.reliable || !report.reliable) {
      ++skipped_subjects;
      continue;
    }
    eval_subjects.push_back(subject);
    true_ahi.push_back(truth.ahi);
    pred_ahi.push_back(report.ahi);
    severity_truth.push_back(int(grade(truth.ahi)));
    severity_pred.push_back(int(grade(report.ahi)));
    risk_truth.push_back(binary_risk(truth.ahi) ? 1 : 0);
    risk_pred.push_back(binary_risk(report.ahi) ? 1 : 0);
  }

  const std::vector<std::string> binary_names = {"negative", "positive"};
  const std::vector<std::string> resp_names = {"N", "A"};
  const std::vector<std::string> sleep_names = {"NS", "S"};
  const std::vector<std::string> severity_names = {"Normal", "Mild",
                                                   "Moderate", "Severe"};
  const std::vector<std::string> risk_names = {"no-risk", "risk"};

  std::ostringstream frame_json;
  if (!resp_truth.empty()) {
    const auto cm = confusion(resp_pred, resp_truth, 2);
    const auto summary = summarize(cm);
    write_text_file(config.out_dir / "eval" / "confusion_resp.txt",
                    cm.to_table(resp_names));
    frame_json << "respiration " << metrics_to_json(summary, resp_names);
    bool both_classes = false;
    for (int l : resp_score_labels)
      if (l != resp_score_labels.front()) both_classes = true;
    if (both_classes) {
      const auto roc = roc_auc(resp_scores, resp_score_labels);
      std::ostringstream roc_csv;
      roc_csv << "threshold,fpr,tpr\n";
      for (size_t i = 0; i < roc.fpr.size(); ++i)
        roc_csv << fmt_shortest(roc.thresholds[i]) << ','
                << fmt_fixed(roc.fpr[i], 6) << ',' << fmt_fixed(roc.tpr[i], 6)
                << '\n';
      write_text_file(config.out_dir / "eval" / "roc_resp.csv", roc_csv.str());
      frame_json << "respiration_auc " << fmt_fixed(roc.auc, 6) << "\n";
    }
  }
  if (!sleep_truth.empty()) {
    const auto cm = confusion(sleep_pred, sleep_truth, 2);
    write_text_file(config.out_dir / "eval" / "confusion_sleep.txt",
                    cm.to_table(sleep_names));
    frame_json << "sleep " << metrics_to_json(summarize(cm), sleep_names);
  }
  write_text_file(config.out_dir / "eval" / "metrics_frame.txt",
                  frame_json.str());

  std::ostringstream subject_json;
  if (eval_subjects.size() >= 2) {
    const auto severity_cm = confusion(severity_pred, severity_truth, 4);
    const auto risk_cm = confusion(risk_pred, risk_truth, 2);
    write_text_file(config.out_dir / "eval" / "confusion_severity.txt",
                    severity_cm.to_table(severity_names));
    write_text_file(config.out_dir / "eval" / "confusion_risk.txt",
                    risk_cm.to_table(risk_names));
    subject_json << "severity " << metrics_to_json(summarize(severity_cm),
                                                   severity_names);
    subject_json << "risk " << metrics_to_json(summarize(risk_cm), risk_names);
    double r = 0.0;
    bool have_r = false;
    try {
      r = pearson(true_ahi, pred_ahi);
      have_r = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_variance) throw;
    }
    if (have_r) subject_json << "pearson_r " << fmt_fixed(r, 6) << '\n';

    std::ostringstream ahi_csv;
    ahi_csv << "subject,true_ahi,predicted_ahi\n";
    for (size_t i = 0; i < eval_subjects.size(); ++i)
      ahi_csv << eval_subjects[i] << ',' << fmt_fixed(true_ahi[i], 4) << ','
              << fmt_fixed(pred_ahi[i], 4) << '\n';
    write_text_file(config.out_dir / "eval" / "ahi_comparison.csv",
                    ahi_csv.str());
    write_text_file(
        config.out_dir / "eval" / "ahi_lines.svg",
        svg_line_chart("Real vs predicted AHI",
                       {{"real", true_ahi}, {"predicted", pred_ahi}},
                       "subject", "AHI (events/h)"));
  }
  subject_json << "skipped_subjects " << skipped_subjects << '\n';
  write_text_file(config.out_dir / "eval" / "metrics_subject.txt",
                  subject_json.str());

  out << frame_json.str() << subject_json.str();
  return 0;
}

int cmd_report(const RunConfig& config, std::ostream& out) {
  const fs::path reports_dir = config.out_dir / "reports";
  std::vector<std::string> rows;
  if (fs::is_directory(reports_dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(reports_dir))
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::ifstream in(file);
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line))
        if (!trim(line).empty()) rows.push_back(std::string(trim(line)));
    }
  }
  if (rows.empty())
    fail(ErrorCode::no_subjects,
         "no per-subject reports under " + reports_dir.string() +
             "; run predict first");

  std::map<std::string, int> severity_counts;
  int risk_count = 0, reliable_count = 0;
  std::ostringstream text;
  text << AhiReport::csv_header() << '\n';
  for (const auto& row : rows) {
    text << row << '\n';
    const auto fields = split(row, ',');
    if (fields.size() >= 7 && fields[6] == "1") {
      ++reliable_count;
      ++severity_counts[std::string(fields[4])];
      if (fields[5] == "1") ++risk_count;
    }
  }
  text << "\nsubjects " << rows.size() << "\nreliable " << reliable_count
       << "\nat_risk " << risk_count << '\n';
  for (const auto& [severity, count] : severity_counts)
    text << "severity_" << severity << ' ' << count << '\n';

  write_text_file(config.out_dir / "report.txt", text.str());
  out << text.str();
  return 0;
}

}  // namespace apneakit::cli
