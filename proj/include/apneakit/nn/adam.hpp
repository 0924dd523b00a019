#pragma once

#include <cmath>
#include <vector>

#include "apneakit/nn/layers.hpp"

namespace apneakit::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moment buffers are keyed by parameter order, which is
// fixed by model traversal.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  const AdamOptions& options() const { return options_; }
  int64_t step_count() const { return t_; }

  void step(const std::vector<Param<T>*>& params) {
    if (m_.empty()) {
      for (Param<T>* p : params) {
        m_.emplace_back(p->value.shape);
        v_.emplace_back(p->value.shape);
      }
    }
    if (m_.size() != params.size())
      fail(ErrorCode::shape_mismatch, "optimizer/parameter count mismatch");

    ++t_;
    const double bc1 = 1.0 - std::pow(options_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(options_.beta2, double(t_));
    for (size_t i = 0; i < params.size(); ++i) {
      Param<T>& p = *params[i];
      Tensor<T>& m = m_[i];
      Tensor<T>& v = v_[i];
      for (int64_t j = 0; j < p.value.size(); ++j) {
        const double g = double(p.grad[j]);
        const double mj = options_.beta1 * double(m[j]) + (1.0 - options_.beta1) * g;
        const double vj = options_.beta2 * double(v[j]) + (1.0 - options_.beta2) * g * g;
        m[j] = T(mj);
        v[j] = T(vj);
        const double m_hat = mj / bc1;
        const double v_hat = vj / bc2;
        p.value[j] = T(double(p.value[j]) -
                       options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps));
      }
    }
  }

 private:
  AdamOptions options_;
  int64_t t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

}  // namespace apneakit::nn
