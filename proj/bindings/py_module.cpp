#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "apneakit/ahi.hpp"
#include "apneakit/classify.hpp"
#include "apneakit/features.hpp"
#include "apneakit/metrics.hpp"
#include "apneakit/nn/train.hpp"
#include "apneakit/nn/weights_io.hpp"
#include "apneakit/preprocess.hpp"

namespace py = pybind11;
using namespace apneakit;

namespace {

py::array_t<double> image_to_array(const nn::Tensor<double>& image) {
  py::array_t<double> out({image.dim(0), image.dim(1), image.dim(2)});
  std::copy(image.data.begin(), image.data.end(), out.mutable_data());
  return out;
}

nn::Tensor<float> array_to_image(const py::array_t<double>& array) {
  const auto buf = array.request();
  if (buf.ndim != 3)
    fail(ErrorCode::shape_mismatch, "expected an HxWxC image array");
  nn::Tensor<float> image(
      {int(buf.shape[0]), int(buf.shape[1]), int(buf.shape[2])});
  auto view = array.unchecked<3>();
  int64_t i = 0;
  for (py::ssize_t h = 0; h < buf.shape[0]; ++h)
    for (py::ssize_t w = 0; w < buf.shape[1]; ++w)
      for (py::ssize_t c = 0; c < buf.shape[2]; ++c)
        image[i++] = float(view(h, w, c));
  return image;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "apneakit core: preprocessing, features, metrics, and inference";

  py::register_exception<Error>(m, "ApneakitError");

  // preprocessing
  m.def("bandpass_ecg", &bandpass_ecg, py::arg("samples"), py::arg("fs"),
        "Zero-phase 0.3-45 Hz Butterworth band-pass");
  m.def("spo2_valid", &spo2_valid, py::arg("samples"));
  m.def(
      "ecg_artifact_flag",
      [](const std::vector<double>& ecg, double fs) {
        const auto v = ecg_artifact_flag(ecg, fs);
        return py::make_tuple(v.clean, v.th1, v.th2);
      },
      py::arg("ecg"), py::arg("fs"),
      "Returns (clean, th1, th2) for a 60 s segment");

  // features
  py::class_<QrsComplex>(m, "QrsComplex")
      .def_readonly("q_index", &QrsComplex::q_index)
      .def_readonly("r_index", &QrsComplex::r_index)
      .def_readonly("s_index", &QrsComplex::s_index)
      .def_readonly("q_amp", &QrsComplex::q_amp)
      .def_readonly("r_amp", &QrsComplex::r_amp)
      .def_readonly("time_s", &QrsComplex::time_s)
      .def("__repr__", [](const QrsComplex& q) {
        return "QrsComplex(r_index=" + std::to_string(q.r_index) +
               ", r_amp=" + std::to_string(q.r_amp) + ")";
      });
  py::class_<EdrSignal>(m, "EdrSignal")
      .def_readonly("samples", &EdrSignal::samples)
      .def_readonly("rate_hz", &EdrSignal::rate_hz)
      .def_readonly("t0_s", &EdrSignal::t0_s);
  py::class_<FeatureSequences>(m, "FeatureSequences")
      .def_property_readonly("rr_intervals",
                             [](const FeatureSequences& f) {
                               return std::vector<double>(
                                   f.rr_intervals.begin(), f.rr_intervals.end());
                             })
      .def_property_readonly("q_amps",
                             [](const FeatureSequences& f) {
                               return std::vector<double>(f.q_amps.begin(),
                                                          f.q_amps.end());
                             })
      .def_property_readonly("r_amps",
                             [](const FeatureSequences& f) {
                               return std::vector<double>(f.r_amps.begin(),
                                                          f.r_amps.end());
                             })
      .def_property_readonly("edr_amps",
                             [](const FeatureSequences& f) {
                               return std::vector<double>(f.edr_amps.begin(),
                                                          f.edr_amps.end());
                             })
      .def_property_readonly("edr_peak_intervals", [](const FeatureSequences& f) {
        return std::vector<double>(f.edr_peak_intervals.begin(),
                                   f.edr_peak_intervals.end());
      });

  m.def("detect_qrs", &detect_qrs, py::arg("ecg"), py::arg("fs"));
  m.def("derive_edr", &derive_edr, py::arg("qrs"), py::arg("segment_len_s"));
  m.def("build_feature_sequences", &build_feature_sequences, py::arg("qrs"),
        py::arg("edr"));
  m.def(
      "edr_spectrogram",
      [](const EdrSignal& edr) { return image_to_array(edr_spectrogram(edr).values); },
      py::arg("edr"), "96x96x3 spectrogram image in [0, 1]");
  m.def(
      "sequences_to_image",
      [](const FeatureSequences& seqs) {
        return image_to_array(sequences_to_image(seqs));
      },
      py::arg("sequences"), "96x96x3 stacked-sequence image in [0, 1]");

  // metrics
  py::class_<ConfusionMatrix>(m, "ConfusionMatrix")
      .def_property_readonly("k", [](const ConfusionMatrix& cm) { return cm.k; })
      .def("at", [](const ConfusionMatrix& cm, int pred, int truth) {
        return cm.at(pred, truth);
      });
  py::class_<ClassMetrics>(m, "ClassMetrics")
      .def_readonly("precision", &ClassMetrics::precision)
      .def_readonly("recall", &ClassMetrics::recall)
      .def_readonly("specificity", &ClassMetrics::specificity)
      .def_readonly("f1", &ClassMetrics::f1);
  py::class_<MetricSummary>(m, "MetricSummary")
      .def_readonly("accuracy", &MetricSummary::accuracy)
      .def_readonly("per_class", &MetricSummary::per_class)
      .def_readonly("macro_precision", &MetricSummary::macro_precision)
      .def_readonly("macro_recall", &MetricSummary::macro_recall)
      .def_readonly("macro_specificity", &MetricSummary::macro_specificity)
      .def_readonly("macro_f1", &MetricSummary::macro_f1);
  py::class_<RocCurve>(m, "RocCurve")
      .def_readonly("thresholds", &RocCurve::thresholds)
      .def_readonly("fpr", &RocCurve::fpr)
      .def_readonly("tpr", &RocCurve::tpr)
      .def_readonly("auc", &RocCurve::auc);

  m.def("confusion", &confusion, py::arg("preds"), py::arg("truths"),
        py::arg("k"));
  m.def("summarize", &summarize, py::arg("confusion_matrix"));
  m.def("roc_auc", &roc_auc, py::arg("scores"), py::arg("labels"));
  m.def(
      "pearson",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        return pearson(x, y);
      },
      py::arg("x"), py::arg("y"));

  // ahi
  py::enum_<Severity>(m, "Severity")
      .value("NORMAL", Severity::normal)
      .value("MILD", Severity::mild)
      .value("MODERATE", Severity::moderate)
      .value("SEVERE", Severity::severe);
  m.def("compute_ahi", &compute_ahi, py::arg("event_count"),
        py::arg("sleep_time_h"));
  m.def("grade", &grade, py::arg("ahi"));
  m.def("binary_risk", &binary_risk, py::arg("ahi"));

  // rule-based event screening
  py::class_<RespEvent>(m, "RespEvent")
      .def_readonly("start_s", &RespEvent::start_s)
      .def_readonly("end_s", &RespEvent::end_s)
      .def_readonly("confirmed", &RespEvent::confirmed);
  m.def(
      "detect_events_rule",
      [](const std::vector<double>& respiration, double fs,
         const std::optional<std::vector<double>>& spo2, double spo2_fs) {
        return detect_events_rule(respiration, fs, spo2 ? &*spo2 : nullptr,
                                  spo2_fs);
      },
      py::arg("respiration"), py::arg("fs"), py::arg("spo2") = std::nullopt,
      py::arg("spo2_fs") = 0.0);

  // inference
  py::class_<nn::Model<float>>(m, "Model")
      .def_property_readonly(
          "num_classes", [](const nn::Model<float>& m) { return m.num_classes; })
      .def_property_readonly("bottlenecks", [](const nn::Model<float>& m) {
        return m.bottleneck_count();
      });
  m.def("build_mobilenet_v2", &nn::build_mobilenet_v2<float>,
        py::arg("num_classes"), py::arg("seed") = 0);
  m.def(
      "load_model",
      [](const std::string& path) {
        auto model = nn::build_mobilenet_v2<float>(2, 0);
        nn::load_weights(model, path);
        return model;
      },
      py::arg("path"), "Load a trained 2-class model from an APNW file");
  m.def(
      "predict",
      [](nn::Model<float>& model, const py::array_t<double>& image) {
        const auto pred = nn::predict(model, array_to_image(image));
        return py::make_tuple(pred.cls, pred.probs);
      },
      py::arg("model"), py::arg("image"),
      "Returns (class_index, probabilities) for an HxWxC image");

  m.attr("__version__") = "0.1.0";
}
