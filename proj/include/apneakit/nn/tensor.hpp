#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "apneakit/error.hpp"

namespace apneakit::nn {

// Dense row-major n-d array. Activations are NHWC throughout the engine.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, T fill = T(0)) : shape(std::move(s)) {
    data.assign(size_t(count(shape)), fill);
  }

  static int64_t count(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }

  int64_t size() const { return int64_t(data.size()); }
  int rank() const { return int(shape.size()); }
  int dim(int i) const { return shape[size_t(i)]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  T& operator[](int64_t i) { return data[size_t(i)]; }
  const T& operator[](int64_t i) const { return data[size_t(i)]; }

  // rank-4 NHWC access
  T& at4(int n, int h, int w, int c) {
    return data[size_t(((int64_t(n) * shape[1] + h) * shape[2] + w) * shape[3] + c)];
  }
  const T& at4(int n, int h, int w, int c) const {
    return data[size_t(((int64_t(n) * shape[1] + h) * shape[2] + w) * shape[3] + c)];
  }

  // rank-2 access
  T& at2(int r, int c) { return data[size_t(int64_t(r) * shape[1] + c)]; }
  const T& at2(int r, int c) const {
    return data[size_t(int64_t(r) * shape[1] + c)];
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = U(data[i]);
    return out;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

template <typename T>
inline void require_rank(const Tensor<T>& t, int rank, const char* what) {
  if (t.rank() != rank)
    fail(ErrorCode::shape_mismatch, std::string(what) + ": expected rank " +
                                        std::to_string(rank) + ", got " +
                                        t.shape_str());
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace apneakit::nn
