#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "apneakit/nn/parallel.hpp"
#include "apneakit/nn/tensor.hpp"

namespace apneakit::nn {

enum class ConvMode : uint8_t { standard, depthwise, pointwise };
enum class Padding : uint8_t { same, valid };

struct ConvSpec {
  ConvMode mode = ConvMode::standard;
  int stride = 1;
  Padding padding = Padding::same;
};

// Accumulates the number of scalar multiplications convolutions perform.
// Padded taps count: kernels run dense loops over an explicitly zero-padded
// input, so the tally equals the loop volume.
struct MulCounter {
  long long count = 0;
};

namespace detail {

struct ConvGeometry {
  int kh = 0, kw = 0, ci = 0, co = 0;
  int out_h = 0, out_w = 0;
  int pad_top = 0, pad_left = 0;
  int pad_h = 0, pad_w = 0;  // total padding per axis
};

inline int out_extent(int in, int k, int stride, Padding padding) {
  if (padding == Padding::same) return (in + stride - 1) / stride;
  return (in - k) / stride + 1;
}

template <typename T>
ConvGeometry conv_geometry(const Tensor<T>& x, const Tensor<T>& kernel,
                           const ConvSpec& spec) {
  require_rank(x, 4, "conv input");
  ConvGeometry g;
  switch (spec.mode) {
    case ConvMode::standard:
    case ConvMode::pointwise:
      require_rank(kernel, 4, "conv kernel");
      g.kh = kernel.dim(0);
      g.kw = kernel.dim(1);
      g.ci = kernel.dim(2);
      g.co = kernel.dim(3);
      if (spec.mode == ConvMode::pointwise && (g.kh != 1 || g.kw != 1))
        fail(ErrorCode::shape_mismatch, "pointwise kernel must be 1x1");
      break;
    case ConvMode::depthwise:
      require_rank(kernel, 3, "depthwise kernel");
      g.kh = kernel.dim(0);
      g.kw = kernel.dim(1);
      g.ci = kernel.dim(2);
      g.co = g.ci;
      break;
  }
  if (x.dim(3) != g.ci)
    fail(ErrorCode::shape_mismatch,
         "conv input channels " + std::to_string(x.dim(3)) +
             " != kernel channels " + std::to_string(g.ci));
  const int in_h = x.dim(1), in_w = x.dim(2);
  if (spec.padding == Padding::valid && (in_h < g.kh || in_w < g.kw))
    fail(ErrorCode::shape_mismatch, "input smaller than VALID kernel");
  g.out_h = out_extent(in_h, g.kh, spec.stride, spec.padding);
  g.out_w = out_extent(in_w, g.kw, spec.stride, spec.padding);
  if (spec.padding == Padding::same) {
    g.pad_h = std::max(0, (g.out_h - 1) * spec.stride + g.kh - in_h);
    g.pad_w = std::max(0, (g.out_w - 1) * spec.stride + g.kw - in_w);
    g.pad_top = g.pad_h / 2;
    g.pad_left = g.pad_w / 2;
  }
  return g;
}

template <typename T>
Tensor<T> zero_pad(const Tensor<T>& x, const ConvGeometry& g) {
  if (g.pad_h == 0 && g.pad_w == 0) return x;
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  Tensor<T> padded({n, h + g.pad_h, w + g.pad_w, c});
  for (int b = 0; b < n; ++b)
    for (int i = 0; i < h; ++i) {
      const T* src = &x.at4(b, i, 0, 0);
      T* dst = &padded.at4(b, i + g.pad_top, g.pad_left, 0);
      std::copy(src, src + int64_t(w) * c, dst);
    }
  return padded;
}

}  // namespace detail

// Cross-correlation over NHWC input. Kernels: standard/pointwise are
// [kh,kw,ci,co] (pointwise kh=kw=1), depthwise is [kh,kw,c] (multiplier 1).
// SAME pads symmetrically with zeros, the extra sample going to the
// bottom/right edge.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& kernel,
                         const ConvSpec& spec, MulCounter* muls = nullptr) {
  using detail::conv_geometry;
  const auto g = conv_geometry(x, kernel, spec);
  const Tensor<T> xp = detail::zero_pad(x, g);
  const int n = x.dim(0);
  const int s = spec.stride;
  Tensor<T> out({n, g.out_h, g.out_w, g.co});

  if (muls) {
    switch (spec.mode) {
      case ConvMode::standard:
      case ConvMode::pointwise:
        muls->count += (long long)n * g.out_h * g.out_w * g.kh * g.kw * g.ci * g.co;
        break;
      case ConvMode::depthwise:
        muls->count += (long long)n * g.out_h * g.out_w * g.kh * g.kw * g.ci;
        break;
    }
  }

  parallel_for(0, int64_t(n) * g.out_h, [&](int64_t lo, int64_t hi) {
    for (int64_t row = lo; row < hi; ++row) {
      const int b = int(row / g.out_h);
      const int oh = int(row % g.out_h);
      for (int ow = 0; ow < g.out_w; ++ow) {
        T* dst = &out.at4(b, oh, ow, 0);
        switch (spec.mode) {
          case ConvMode::pointwise: {
            const T* src = &xp.at4(b, oh * s, ow * s, 0);
            const T* k = kernel.data.data();
            for (int ci = 0; ci < g.ci; ++ci) {
              const T xv = src[ci];
              const T* krow = k + int64_t(ci) * g.co;
              for (int co = 0; co < g.co; ++co) dst[co] += xv * krow[co];
            }
            break;
          }
          case ConvMode::standard: {
            for (int kh = 0; kh < g.kh; ++kh)
              for (int kw = 0; kw < g.kw; ++kw) {
                const T* src = &xp.at4(b, oh * s + kh, ow * s + kw, 0);
                const T* k =
                    &kernel.data[size_t((int64_t(kh) * g.kw + kw) * g.ci * g.co)];
                for (int ci = 0; ci < g.ci; ++ci) {
                  const T xv = src[ci];
                  const T* krow = k + int64_t(ci) * g.co;
                  for (int co = 0; co < g.co; ++co) dst[co] += xv * krow[co];
                }
              }
            break;
          }
          case ConvMode::depthwise: {
            for (int kh = 0; kh < g.kh; ++kh)
              for (int kw = 0; kw < g.kw; ++kw) {
                const T* src = &xp.at4(b, oh * s + kh, ow * s + kw, 0);
                const T* k = &kernel.data[size_t((int64_t(kh) * g.kw + kw) * g.ci)];
                for (int c = 0; c < g.ci; ++c) dst[c] += src[c] * k[c];
              }
            break;
          }
        }
      }
    }
  });
  return out;
}

template <typename T>
struct ConvGrads {
  Tensor<T> grad_x;
  Tensor<T> grad_kernel;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                             const Tensor<T>& kernel, const ConvSpec& spec) {
  const auto g = detail::conv_geometry(x, kernel, spec);
  if (grad_out.rank() != 4 || grad_out.dim(0) != x.dim(0) ||
      grad_out.dim(1) != g.out_h || grad_out.dim(2) != g.out_w ||
      grad_out.dim(3) != g.co)
    fail(ErrorCode::shape_mismatch, "conv grad_out shape " +
                                        grad_out.shape_str() +
                                        " does not match forward output");

  const int n = x.dim(0), in_h = x.dim(1), in_w = x.dim(2);
  const int s = spec.stride;
  const bool dw = spec.mode == ConvMode::depthwise;

  ConvGrads<T> grads;
  grads.grad_kernel = Tensor<T>(kernel.shape);
  grads.grad_x = Tensor<T>(x.shape);

  // tap-major transposed kernel [kh*kw][co][ci] keeps the gather loops
  // elementwise over ci, which vectorizes without reassociation
  Tensor<T> kt;
  if (!dw) {
    kt = Tensor<T>({g.kh * g.kw, g.co, g.ci});
    for (int tap = 0; tap < g.kh * g.kw; ++tap)
      for (int ci = 0; ci < g.ci; ++ci)
        for (int co = 0; co < g.co; ++co)
          kt.data[size_t((int64_t(tap) * g.co + co) * g.ci + ci)] =
              kernel.data[size_t((int64_t(tap) * g.ci + ci) * g.co + co)];
  }

  // grad wrt input, gathered so each element is written exactly once
  parallel_for(0, int64_t(n) * in_h, [&](int64_t lo, int64_t hi) {
    for (int64_t row = lo; row < hi; ++row) {
      const int b = int(row / in_h);
      const int ih = int(row % in_h);
      for (int kh = 0; kh < g.kh; ++kh) {
        const int oh_num = ih + g.pad_top - kh;
        if (oh_num % s != 0) continue;
        const int oh = oh_num / s;
        if (oh < 0 || oh >= g.out_h) continue;
        for (int iw = 0; iw < in_w; ++iw) {
          T* dst = &grads.grad_x.at4(b, ih, iw, 0);
          for (int kw = 0; kw < g.kw; ++kw) {
            const int ow_num = iw + g.pad_left - kw;
            if (ow_num % s != 0) continue;
            const int ow = ow_num / s;
            if (ow < 0 || ow >= g.out_w) continue;
            const T* go = &grad_out.at4(b, oh, ow, 0);
            const int tap = kh * g.kw + kw;
            if (dw) {
              const T* k = &kernel.data[size_t(int64_t(tap) * g.ci)];
              for (int c = 0; c < g.ci; ++c) dst[c] += go[c] * k[c];
            } else {
              const T* kt_tap = &kt.data[size_t(int64_t(tap) * g.co * g.ci)];
              for (int co = 0; co < g.co; ++co) {
                const T gv = go[co];
                const T* krow = kt_tap + int64_t(co) * g.ci;
                for (int ci = 0; ci < g.ci; ++ci) dst[ci] += gv * krow[ci];
              }
            }
          }
        }
      }
    }
  });

  // grad wrt kernel; workers own disjoint (tap, channel-block) slices and
  // run their reductions in a fixed order
  const int taps = g.kh * g.kw;
  const int want_tasks = std::max(2, 2 * num_threads());
  const int blocks =
      std::max(1, std::min(g.ci, (want_tasks + taps - 1) / taps));
  const int block = (g.ci + blocks - 1) / blocks;
  parallel_for(0, int64_t(taps) * blocks, [&](int64_t lo, int64_t hi) {
    for (int64_t task = lo; task < hi; ++task) {
      const int tap = int(task / blocks);
      const int kh = tap / g.kw;
      const int kw = tap % g.kw;
      const int c_lo = int(task % blocks) * block;
      const int c_hi = std::min(g.ci, c_lo + block);
      if (c_lo >= c_hi) continue;
      T* gk = dw ? &grads.grad_kernel.data[size_t(int64_t(tap) * g.ci)]
                 : &grads.grad_kernel.data[size_t(int64_t(tap) * g.ci * g.co)];
      for (int b = 0; b < n; ++b)
        for (int oh = 0; oh < g.out_h; ++oh) {
          const int ih = oh * s + kh - g.pad_top;
          if (ih < 0 || ih >= in_h) continue;
          for (int ow = 0; ow < g.out_w; ++ow) {
            const int iw = ow * s + kw - g.pad_left;
            if (iw < 0 || iw >= in_w) continue;
            const T* src = &x.at4(b, ih, iw, 0);
            const T* go = &grad_out.at4(b, oh, ow, 0);
            if (dw) {
              for (int c = c_lo; c < c_hi; ++c) gk[c] += src[c] * go[c];
            } else {
              for (int ci = c_lo; ci < c_hi; ++ci) {
                const T xv = src[ci];
                T* grow = gk + int64_t(ci) * g.co;
                for (int co = 0; co < g.co; ++co) grow[co] += xv * go[co];
              }
            }
          }
        }
    }
  });
  return grads;
}

// min(max(x, 0), 6); the gradient passes only strictly inside (0, 6).
template <typename T>
Tensor<T> relu6_forward(const Tensor<T>& x) {
  Tensor<T> out = x;
  parallel_for(0, out.size(), [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i)
      out[i] = std::min(std::max(out[i], T(0)), T(6));
  });
  return out;
}

template <typename T>
Tensor<T> relu6_backward(const Tensor<T>& grad_out, const Tensor<T>& x) {
  if (!grad_out.same_shape(x))
    fail(ErrorCode::shape_mismatch, "relu6 grad shape mismatch");
  Tensor<T> gx(x.shape);
  parallel_for(0, x.size(), [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i)
      gx[i] = (x[i] > T(0) && x[i] < T(6)) ? grad_out[i] : T(0);
  });
  return gx;
}

enum class Phase : uint8_t { train, infer };

template <typename T>
struct BnState {
  Tensor<T> gamma, beta;
  Tensor<T> running_mean, running_var;  // biased variance
  double momentum = 0.9;
  double eps = 1e-5;

  explicit BnState(int channels = 0)
      : gamma({channels}, T(1)),
        beta({channels}, T(0)),
        running_mean({channels}, T(0)),
        running_var({channels}, T(1)) {}
};

template <typename T>
struct BnCache {
  Tensor<T> x_hat;
  std::vector<T> mean, inv_std;
};

template <typename T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, BnState<T>& state, Phase phase,
                            BnCache<T>* cache = nullptr) {
  require_rank(x, 4, "batchnorm input");
  const int c = x.dim(3);
  if (c != state.gamma.dim(0))
    fail(ErrorCode::shape_mismatch, "batchnorm channel mismatch");
  const int64_t m = x.size() / c;
  if (phase == Phase::train && x.dim(0) < 2)
    fail(ErrorCode::degenerate_batch,
         "train-mode batchnorm needs batch >= 2, got " +
             std::to_string(x.dim(0)));

  std::vector<T> mean(size_t(c), T(0)), var(size_t(c), T(0));
  if (phase == Phase::train) {
    for (int64_t i = 0; i < m; ++i) {
      const T* row = &x.data[size_t(i * c)];
      for (int ch = 0; ch < c; ++ch) mean[size_t(ch)] += row[ch];
    }
    for (int ch = 0; ch < c; ++ch) mean[size_t(ch)] /= T(m);
    for (int64_t i = 0; i < m; ++i) {
      const T* row = &x.data[size_t(i * c)];
      for (int ch = 0; ch < c; ++ch) {
        const T d = row[ch] - mean[size_t(ch)];
        var[size_t(ch)] += d * d;
      }
    }
    for (int ch = 0; ch < c; ++ch) var[size_t(ch)] /= T(m);
    for (int ch = 0; ch < c; ++ch) {
      state.running_mean[ch] = T(state.momentum) * state.running_mean[ch] +
                               T(1 - state.momentum) * mean[size_t(ch)];
      state.running_var[ch] = T(state.momentum) * state.running_var[ch] +
                              T(1 - state.momentum) * var[size_t(ch)];
    }
  } else {
    for (int ch = 0; ch < c; ++ch) {
      mean[size_t(ch)] = state.running_mean[ch];
      var[size_t(ch)] = state.running_var[ch];
    }
  }

  std::vector<T> inv_std(static_cast<size_t>(c));
  for (int ch = 0; ch < c; ++ch)
    inv_std[size_t(ch)] = T(1) / std::sqrt(var[size_t(ch)] + T(state.eps));

  Tensor<T> out(x.shape);
  Tensor<T>* x_hat_dst = nullptr;
  if (cache) {
    cache->x_hat = Tensor<T>(x.shape);
    cache->mean = mean;
    cache->inv_std = inv_std;
    x_hat_dst = &cache->x_hat;
  }
  parallel_for(0, m, [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      const T* row = &x.data[size_t(i * c)];
      T* dst = &out.data[size_t(i * c)];
      T* hat = x_hat_dst ? &x_hat_dst->data[size_t(i * c)] : nullptr;
      for (int ch = 0; ch < c; ++ch) {
        const T xh = (row[ch] - mean[size_t(ch)]) * inv_std[size_t(ch)];
        if (hat) hat[ch] = xh;
        dst[ch] = state.gamma[ch] * xh + state.beta[ch];
      }
    }
  });
  return out;
}

template <typename T>
struct BnGrads {
  Tensor<T> grad_x, grad_gamma, grad_beta;
};

// Train-mode backward through the batch statistics.
template <typename T>
BnGrads<T> batchnorm_backward(const Tensor<T>& grad_out,
                              const BnState<T>& state,
                              const BnCache<T>& cache) {
  const int c = grad_out.dim(3);
  const int64_t m = grad_out.size() / c;
  BnGrads<T> grads;
  grads.grad_gamma = Tensor<T>({c});
  grads.grad_beta = Tensor<T>({c});
  grads.grad_x = Tensor<T>(grad_out.shape);

  std::vector<T> sum_gy(size_t(c), T(0)), sum_gy_xhat(size_t(c), T(0));
  for (int64_t i = 0; i < m; ++i) {
    const T* gy = &grad_out.data[size_t(i * c)];
    const T* xh = &cache.x_hat.data[size_t(i * c)];
    for (int ch = 0; ch < c; ++ch) {
      sum_gy[size_t(ch)] += gy[ch];
      sum_gy_xhat[size_t(ch)] += gy[ch] * xh[ch];
    }
  }
  for (int ch = 0; ch < c; ++ch) {
    grads.grad_beta[ch] = sum_gy[size_t(ch)];
    grads.grad_gamma[ch] = sum_gy_xhat[size_t(ch)];
  }
  parallel_for(0, m, [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; ++i) {
      const T* gy = &grad_out.data[size_t(i * c)];
      const T* xh = &cache.x_hat.data[size_t(i * c)];
      T* gx = &grads.grad_x.data[size_t(i * c)];
      for (int ch = 0; ch < c; ++ch) {
        const T k = state.gamma[ch] * cache.inv_std[size_t(ch)] / T(m);
        gx[ch] = k * (T(m) * gy[ch] - sum_gy[size_t(ch)] -
                      xh[ch] * sum_gy_xhat[size_t(ch)]);
      }
    }
  });
  return grads;
}

// NHWC -> (N, C) spatial mean.
template <typename T>
Tensor<T> global_avgpool_forward(const Tensor<T>& x) {
  require_rank(x, 4, "avgpool input");
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  Tensor<T> out({n, c});
  for (int b = 0; b < n; ++b) {
    T* dst = &out.at2(b, 0);
    for (int i = 0; i < h * w; ++i) {
      const T* src = &x.data[size_t((int64_t(b) * h * w + i) * c)];
      for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
    }
    for (int ch = 0; ch < c; ++ch) dst[ch] /= T(h * w);
  }
  return out;
}

template <typename T>
Tensor<T> global_avgpool_backward(const Tensor<T>& grad_out,
                                  const std::vector<int>& input_shape) {
  Tensor<T> gx(input_shape);
  const int n = input_shape[0], h = input_shape[1], w = input_shape[2],
            c = input_shape[3];
  for (int b = 0; b < n; ++b)
    for (int i = 0; i < h * w; ++i) {
      T* dst = &gx.data[size_t((int64_t(b) * h * w + i) * c)];
      const T* src = &grad_out.at2(b, 0);
      for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch] / T(h * w);
    }
  return gx;
}

// x (N, Ci) * w (Ci, Co) + b (Co)
template <typename T>
Tensor<T> fc_forward(const Tensor<T>& x, const Tensor<T>& w,
                     const Tensor<T>& b) {
  require_rank(x, 2, "fc input");
  if (x.dim(1) != w.dim(0) || w.dim(1) != b.dim(0))
    fail(ErrorCode::shape_mismatch, "fc shape mismatch");
  const int n = x.dim(0), ci = w.dim(0), co = w.dim(1);
  Tensor<T> out({n, co});
  for (int i = 0; i < n; ++i) {
    T* dst = &out.at2(i, 0);
    for (int c = 0; c < co; ++c) dst[c] = b[c];
    for (int k = 0; k < ci; ++k) {
      const T xv = x.at2(i, k);
      const T* wrow = &w.at2(k, 0);
      for (int c = 0; c < co; ++c) dst[c] += xv * wrow[c];
    }
  }
  return out;
}

template <typename T>
struct FcGrads {
  Tensor<T> grad_x, grad_w, grad_b;
};

template <typename T>
FcGrads<T> fc_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                       const Tensor<T>& w) {
  const int n = x.dim(0), ci = w.dim(0), co = w.dim(1);
  FcGrads<T> g;
  g.grad_x = Tensor<T>({n, ci});
  g.grad_w = Tensor<T>({ci, co});
  g.grad_b = Tensor<T>({co});
  for (int i = 0; i < n; ++i) {
    const T* go = &grad_out.at2(i, 0);
    for (int c = 0; c < co; ++c) g.grad_b[c] += go[c];
    for (int k = 0; k < ci; ++k) {
      const T* wrow = &w.at2(k, 0);
      T acc = T(0);
      for (int c = 0; c < co; ++c) acc += go[c] * wrow[c];
      g.grad_x.at2(i, k) = acc;
      const T xv = x.at2(i, k);
      T* gw = &g.grad_w.at2(k, 0);
      for (int c = 0; c < co; ++c) gw[c] += xv * go[c];
    }
  }
  return g;
}

// Row-wise softmax with max subtraction.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  require_rank(logits, 2, "softmax input");
  const int n = logits.dim(0), k = logits.dim(1);
  Tensor<T> out(logits.shape);
  for (int i = 0; i < n; ++i) {
    const T* row = &logits.at2(i, 0);
    T* dst = &out.at2(i, 0);
    T mx = row[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    T sum = T(0);
    for (int j = 0; j < k; ++j) {
      dst[j] = std::exp(row[j] - mx);
      sum += dst[j];
    }
    for (int j = 0; j < k; ++j) dst[j] /= sum;
  }
  return out;
}

// Mean -log p(target) over the batch.
template <typename T>
double cross_entropy(const Tensor<T>& probs, const std::vector<int>& labels) {
  require_rank(probs, 2, "cross_entropy probs");
  if (size_t(probs.dim(0)) != labels.size())
    fail(ErrorCode::shape_mismatch, "cross_entropy batch mismatch");
  const int k = probs.dim(1);
  double loss = 0.0;
  for (int i = 0; i < probs.dim(0); ++i) {
    const int t = labels[size_t(i)];
    if (t < 0 || t >= k)
      fail(ErrorCode::label_out_of_range, "label " + std::to_string(t));
    loss += -std::log(std::max(double(probs.at2(i, t)), 1e-300));
  }
  return loss / double(probs.dim(0));
}

// Gradient of mean cross-entropy wrt logits: (probs - onehot) / batch.
template <typename T>
Tensor<T> softmax_cross_entropy_backward(const Tensor<T>& probs,
                                         const std::vector<int>& labels) {
  Tensor<T> grad = probs;
  const int n = probs.dim(0);
  for (int i = 0; i < n; ++i) grad.at2(i, labels[size_t(i)]) -= T(1);
  for (T& v : grad.data) v /= T(n);
  return grad;
}

}  // namespace apneakit::nn
