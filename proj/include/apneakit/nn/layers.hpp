#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "apneakit/nn/ops.hpp"

namespace apneakit::nn {

// Kinds appear as the per-entry tag byte in weight files; keep values stable.
enum class LayerKind : uint8_t {
  conv_std = 1,
  conv_dw = 2,
  conv_pw = 3,
  batchnorm = 4,
  relu6 = 5,
  avgpool_global = 6,
  fc = 7,
  softmax = 8,
  bottleneck = 9,
};

const char* layer_kind_name(LayerKind kind);

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

// One serialized tensor: trainable params plus batchnorm running stats.
template <typename T>
struct StateEntry {
  LayerKind kind;
  std::string name;
  Tensor<T>* tensor;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, Phase phase) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual void collect_params(std::vector<Param<T>*>& out) {}
  virtual void collect_state(std::vector<StateEntry<T>>& out) {}
  virtual LayerKind kind() const = 0;
};

template <typename T>
T kaiming_limit(int64_t fan_in) {
  return T(std::sqrt(6.0 / double(fan_in)));
}

template <typename T>
void kaiming_uniform_init(Tensor<T>& t, int64_t fan_in, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-double(kaiming_limit<T>(fan_in)),
                                              double(kaiming_limit<T>(fan_in)));
  for (T& v : t.data) v = T(dist(rng));
}

template <typename T>
class Conv2dLayer final : public Layer<T> {
 public:
  Conv2dLayer(ConvMode mode, int kh, int kw, int ci, int co, int stride,
              Padding padding, std::mt19937_64& rng)
      : spec_{mode, stride, padding} {
    kernel_.name = "kernel";
    if (mode == ConvMode::depthwise) {
      kernel_.value = Tensor<T>({kh, kw, ci});
      kaiming_uniform_init(kernel_.value, int64_t(kh) * kw, rng);
    } else {
      kernel_.value = Tensor<T>({kh, kw, ci, co});
      kaiming_uniform_init(kernel_.value, int64_t(kh) * kw * ci, rng);
    }
    kernel_.grad = Tensor<T>(kernel_.value.shape);
  }

  Tensor<T> forward(const Tensor<T>& x, Phase) override {
    x_ = x;
    return conv2d_forward(x, kernel_.value, spec_);
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    auto grads = conv2d_backward(grad_out, x_, kernel_.value, spec_);
    for (int64_t i = 0; i < kernel_.grad.size(); ++i)
      kernel_.grad[i] += grads.grad_kernel[i];
    return std::move(grads.grad_x);
  }

  void collect_params(std::vector<Param<T>*>& out) override {
    out.push_back(&kernel_);
  }
  void collect_state(std::vector<StateEntry<T>>& out) override {
    out.push_back({kind(), "kernel", &kernel_.value});
  }
  LayerKind kind() const override {
    switch (spec_.mode) {
      case ConvMode::standard: return LayerKind::conv_std;
      case ConvMode::depthwise: return LayerKind::conv_dw;
      case ConvMode::pointwise: return LayerKind::conv_pw;
    }
    return LayerKind::conv_std;
  }

  const ConvSpec& spec() const { return spec_; }
  const Tensor<T>& kernel() const { return kernel_.value; }
  Tensor<T>& kernel() { return kernel_.value; }

 private:
  ConvSpec spec_;
  Param<T> kernel_;
  Tensor<T> x_;
};

template <typename T>
class BatchNormLayer final : public Layer<T> {
 public:
  explicit BatchNormLayer(int channels) : state_(channels) {
    gamma_.name = "gamma";
    gamma_.value = state_.gamma;
    gamma_.grad = Tensor<T>({channels});
    beta_.name = "beta";
    beta_.value = state_.beta;
    beta_.grad = Tensor<T>({channels});
  }

  Tensor<T> forward(const Tensor<T>& x, Phase phase) override {
    state_.gamma = gamma_.value;
    state_.beta = beta_.value;
    return batchnorm_forward(x, state_, phase,
                             phase == Phase::train ? &cache_ : nullptr);
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    auto grads = batchnorm_backward(grad_out, state_, cache_);
    for (int64_t i = 0; i < gamma_.grad.size(); ++i) {
      gamma_.grad[i] += grads.grad_gamma[i];
      beta_.grad[i] += grads.grad_beta[i];
    }
    return std::move(grads.grad_x);
  }

  void collect_params(std::vector<Param<T>*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
  }
  void collect_state(std::vector<StateEntry<T>>& out) override {
    out.push_back({kind(), "gamma", &gamma_.value});
    out.push_back({kind(), "beta", &beta_.value});
    out.push_back({kind(), "running_mean", &state_.running_mean});
    out.push_back({kind(), "running_var", &state_.running_var});
  }
  LayerKind kind() const override { return LayerKind::batchnorm; }

  BnState<T>& state() { return state_; }

 private:
  BnState<T> state_;
  Param<T> gamma_, beta_;
  BnCache<T> cache_;
};

template <typename T>
class Relu6Layer final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Phase) override {
    x_ = x;
    return relu6_forward(x);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    return relu6_backward(grad_out, x_);
  }
  LayerKind kind() const override { return LayerKind::relu6; }

 private:
  Tensor<T> x_;
};

// Inverted residual: pointwise expand -> BN -> ReLU6 -> depthwise -> BN ->
// ReLU6 -> pointwise project -> BN (linear), with a skip connection when the
// block keeps stride 1 and its channel count.
template <typename T>
class BottleneckLayer final : public Layer<T> {
 public:
  BottleneckLayer(int c_in, int c_out, int expansion, int stride,
                  std::mt19937_64& rng)
      : residual_(stride == 1 && c_in == c_out) {
    const int c_mid = c_in * expansion;
    expand_ = std::make_unique<Conv2dLayer<T>>(ConvMode::pointwise, 1, 1, c_in,
                                               c_mid, 1, Padding::same, rng);
    expand_bn_ = std::make_unique<BatchNormLayer<T>>(c_mid);
    dw_ = std::make_unique<Conv2dLayer<T>>(ConvMode::depthwise, 3, 3, c_mid,
                                           c_mid, stride, Padding::same, rng);
    dw_bn_ = std::make_unique<BatchNormLayer<T>>(c_mid);
    project_ = std::make_unique<Conv2dLayer<T>>(ConvMode::pointwise, 1, 1,
                                                c_mid, c_out, 1, Padding::same,
                                                rng);
    project_bn_ = std::make_unique<BatchNormLayer<T>>(c_out);
  }

  Tensor<T> forward(const Tensor<T>& x, Phase phase) override {
    Tensor<T> y = expand_->forward(x, phase);
    y = expand_bn_->forward(y, phase);
    y = relu1_.forward(y, phase);
    y = dw_->forward(y, phase);
    y = dw_bn_->forward(y, phase);
    y = relu2_.forward(y, phase);
    y = project_->forward(y, phase);
    y = project_bn_->forward(y, phase);
    if (residual_) {
      for (int64_t i = 0; i < y.size(); ++i) y[i] += x[i];
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> g = project_bn_->backward(grad_out);
    g = project_->backward(g);
    g = relu2_.backward(g);
    g = dw_bn_->backward(g);
    g = dw_->backward(g);
    g = relu1_.backward(g);
    g = expand_bn_->backward(g);
    g = expand_->backward(g);
    if (residual_) {
      for (int64_t i = 0; i < g.size(); ++i) g[i] += grad_out[i];
    }
    return g;
  }

  void collect_params(std::vector<Param<T>*>& out) override {
    expand_->collect_params(out);
    expand_bn_->collect_params(out);
    dw_->collect_params(out);
    dw_bn_->collect_params(out);
    project_->collect_params(out);
    project_bn_->collect_params(out);
  }
  void collect_state(std::vector<StateEntry<T>>& out) override {
    expand_->collect_state(out);
    expand_bn_->collect_state(out);
    dw_->collect_state(out);
    dw_bn_->collect_state(out);
    project_->collect_state(out);
    project_bn_->collect_state(out);
  }
  LayerKind kind() const override { return LayerKind::bottleneck; }

  bool has_residual() const { return residual_; }

 private:
  bool residual_;
  std::unique_ptr<Conv2dLayer<T>> expand_, dw_, project_;
  std::unique_ptr<BatchNormLayer<T>> expand_bn_, dw_bn_, project_bn_;
  Relu6Layer<T> relu1_, relu2_;
};

template <typename T>
class GlobalAvgPoolLayer final : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, Phase) override {
    input_shape_ = x.shape;
    return global_avgpool_forward(x);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    return global_avgpool_backward(grad_out, input_shape_);
  }
  LayerKind kind() const override { return LayerKind::avgpool_global; }

 private:
  std::vector<int> input_shape_;
};

template <typename T>
class DenseLayer final : public Layer<T> {
 public:
  DenseLayer(int c_in, int c_out, std::mt19937_64& rng) {
    w_.name = "weight";
    w_.value = Tensor<T>({c_in, c_out});
    kaiming_uniform_init(w_.value, c_in, rng);
    w_.grad = Tensor<T>({c_in, c_out});
    b_.name = "bias";
    b_.value = Tensor<T>({c_out});
    b_.grad = Tensor<T>({c_out});
  }

  Tensor<T> forward(const Tensor<T>& x, Phase) override {
    x_ = x;
    return fc_forward(x, w_.value, b_.value);
  }
  Tensor<T> backward(const Tensor<T>& grad_out) override {
    auto grads = fc_backward(grad_out, x_, w_.value);
    for (int64_t i = 0; i < w_.grad.size(); ++i) w_.grad[i] += grads.grad_w[i];
    for (int64_t i = 0; i < b_.grad.size(); ++i) b_.grad[i] += grads.grad_b[i];
    return std::move(grads.grad_x);
  }

  void collect_params(std::vector<Param<T>*>& out) override {
    out.push_back(&w_);
    out.push_back(&b_);
  }
  void collect_state(std::vector<StateEntry<T>>& out) override {
    out.push_back({kind(), "weight", &w_.value});
    out.push_back({kind(), "bias", &b_.value});
  }
  LayerKind kind() const override { return LayerKind::fc; }

 private:
  Param<T> w_, b_;
  Tensor<T> x_;
};

// A straight chain of layers ending in logits; softmax lives in the loss and
// in predict().
template <typename T>
class Model {
 public:
  Model() = default;
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  int num_classes = 0;
  int input_hw = 0;
  int input_channels = 0;
  std::vector<std::unique_ptr<Layer<T>>> layers;

  Tensor<T> forward(const Tensor<T>& x, Phase phase) {
    Tensor<T> y = x;
    for (auto& layer : layers) y = layer->forward(y, phase);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_logits) {
    Tensor<T> g = grad_logits;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
      g = (*it)->backward(g);
    return g;
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    for (auto& layer : layers) layer->collect_params(out);
    return out;
  }

  std::vector<StateEntry<T>> state_entries() {
    std::vector<StateEntry<T>> out;
    for (auto& layer : layers) layer->collect_state(out);
    return out;
  }

  void zero_grads() {
    for (Param<T>* p : params())
      std::fill(p->grad.data.begin(), p->grad.data.end(), T(0));
  }

  int bottleneck_count() const {
    int n = 0;
    for (const auto& layer : layers)
      if (layer->kind() == LayerKind::bottleneck) ++n;
    return n;
  }
};

struct BottleneckSpec {
  int expansion;
  int channels;
  int repeats;
  int stride;
};

// The standard inverted-residual schedule; the repeats sum to 17 blocks.
inline const std::vector<BottleneckSpec>& mobilenet_v2_schedule() {
  static const std::vector<BottleneckSpec> schedule = {
      {1, 16, 1, 1}, {6, 24, 2, 2},  {6, 32, 3, 2}, {6, 64, 4, 2},
      {6, 96, 3, 1}, {6, 160, 3, 2}, {6, 320, 1, 1},
  };
  return schedule;
}

// 96x96x3 input, 3x3 stem with 32 filters, 17 bottlenecks, 1x1 head to 1280,
// global average pooling, fully connected classifier.
template <typename T>
Model<T> build_mobilenet_v2(int num_classes, uint64_t seed) {
  std::mt19937_64 rng(seed);
  Model<T> model;
  model.num_classes = num_classes;
  model.input_hw = 96;
  model.input_channels = 3;

  auto& L = model.layers;
  L.push_back(std::make_unique<Conv2dLayer<T>>(ConvMode::standard, 3, 3, 3, 32,
                                               2, Padding::same, rng));
  L.push_back(std::make_unique<BatchNormLayer<T>>(32));
  L.push_back(std::make_unique<Relu6Layer<T>>());

  int c_in = 32;
  for (const auto& spec : mobilenet_v2_schedule()) {
    for (int i = 0; i < spec.repeats; ++i) {
      const int stride = i == 0 ? spec.stride : 1;
      L.push_back(std::make_unique<BottleneckLayer<T>>(
          c_in, spec.channels, spec.expansion, stride, rng));
      c_in = spec.channels;
    }
  }

  L.push_back(std::make_unique<Conv2dLayer<T>>(ConvMode::pointwise, 1, 1, c_in,
                                               1280, 1, Padding::same, rng));
  L.push_back(std::make_unique<BatchNormLayer<T>>(1280));
  L.push_back(std::make_unique<Relu6Layer<T>>());
  L.push_back(std::make_unique<GlobalAvgPoolLayer<T>>());
  L.push_back(std::make_unique<DenseLayer<T>>(1280, num_classes, rng));

  if (model.bottleneck_count() != 17)
    fail(ErrorCode::shape_mismatch, "expected 17 bottlenecks");
  return model;
}

// Small two-bottleneck net for tests and quick experiments.
template <typename T>
Model<T> build_micro_cnn(int num_classes, int input_hw, int input_channels,
                         uint64_t seed) {
  std::mt19937_64 rng(seed);
  Model<T> model;
  model.num_classes = num_classes;
  model.input_hw = input_hw;
  model.input_channels = input_channels;

  auto& L = model.layers;
  L.push_back(std::make_unique<Conv2dLayer<T>>(
      ConvMode::standard, 3, 3, input_channels, 8, 2, Padding::same, rng));
  L.push_back(std::make_unique<BatchNormLayer<T>>(8));
  L.push_back(std::make_unique<Relu6Layer<T>>());
  L.push_back(std::make_unique<BottleneckLayer<T>>(8, 16, 4, 2, rng));
  L.push_back(std::make_unique<BottleneckLayer<T>>(16, 16, 4, 1, rng));
  L.push_back(std::make_unique<GlobalAvgPoolLayer<T>>());
  L.push_back(std::make_unique<DenseLayer<T>>(16, num_classes, rng));
  return model;
}

}  // namespace apneakit::nn
