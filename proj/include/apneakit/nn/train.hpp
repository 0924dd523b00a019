#pragma once

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <vector>

#include "apneakit/nn/adam.hpp"
#include "apneakit/nn/layers.hpp"

namespace apneakit::nn {

template <typename T>
struct Dataset {
  std::vector<Tensor<T>> inputs;  // HWC images
  std::vector<int> labels;

  size_t size() const { return inputs.size(); }
};

struct TrainOptions {
  int epochs = 20;
  int batch = 32;
  double lr = 1e-3;
  uint64_t seed = 0;
  // Stop once validation accuracy reaches this value (< 0 disables).
  double early_stop_val_acc = -1.0;
  bool verbose = false;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = -1;  // epoch whose weights the model ends up holding
  double best_val_acc = 0.0;
};

struct Prediction {
  int cls = 0;
  std::vector<double> probs;
};

// Argmax of the softmax'd logits; ties go to the lower class index.
template <typename T>
Prediction predict(Model<T>& model, const Tensor<T>& input) {
  Tensor<T> batched = input;
  if (input.rank() == 3)
    batched.shape = {1, input.dim(0), input.dim(1), input.dim(2)};
  require_rank(batched, 4, "predict input");
  Tensor<T> probs = softmax(model.forward(batched, Phase::infer));
  Prediction pred;
  pred.probs.resize(size_t(probs.dim(1)));
  for (int j = 0; j < probs.dim(1); ++j) pred.probs[size_t(j)] = double(probs.at2(0, j));
  for (int j = 1; j < probs.dim(1); ++j)
    if (pred.probs[size_t(j)] > pred.probs[size_t(pred.cls)]) pred.cls = j;
  return pred;
}

template <typename T>
Tensor<T> stack_batch(const Dataset<T>& data, const std::vector<size_t>& order,
                      size_t begin, size_t end) {
  const Tensor<T>& first = data.inputs[order[begin]];
  std::vector<int> shape = {int(end - begin)};
  shape.insert(shape.end(), first.shape.begin(), first.shape.end());
  Tensor<T> batch(shape);
  const int64_t item = first.size();
  for (size_t i = begin; i < end; ++i) {
    const Tensor<T>& src = data.inputs[order[i]];
    if (src.size() != item)
      fail(ErrorCode::shape_mismatch, "ragged dataset item");
    std::copy(src.data.begin(), src.data.end(),
              batch.data.begin() + int64_t(i - begin) * item);
  }
  return batch;
}

struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

template <typename T>
EvalStats evaluate(Model<T>& model, const Dataset<T>& data, int batch) {
  EvalStats stats;
  if (data.size() == 0) return stats;
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t(0));
  double loss_sum = 0.0;
  int64_t correct = 0;
  for (size_t begin = 0; begin < data.size(); begin += size_t(batch)) {
    const size_t end = std::min(data.size(), begin + size_t(batch));
    Tensor<T> x = stack_batch(data, order, begin, end);
    Tensor<T> probs = softmax(model.forward(x, Phase::infer));
    std::vector<int> labels(end - begin);
    for (size_t i = begin; i < end; ++i) labels[i - begin] = data.labels[order[i]];
    loss_sum += cross_entropy(probs, labels) * double(end - begin);
    for (size_t i = 0; i < end - begin; ++i) {
      int argmax = 0;
      for (int j = 1; j < probs.dim(1); ++j)
        if (probs.at2(int(i), j) > probs.at2(int(i), argmax)) argmax = j;
      if (argmax == labels[i]) ++correct;
    }
  }
  stats.loss = loss_sum / double(data.size());
  stats.accuracy = double(correct) / double(data.size());
  return stats;
}

namespace detail {

template <typename T>
std::vector<Tensor<T>> snapshot_state(Model<T>& model) {
  std::vector<Tensor<T>> out;
  for (const auto& entry : model.state_entries()) out.push_back(*entry.tensor);
  return out;
}

template <typename T>
void restore_state(Model<T>& model, const std::vector<Tensor<T>>& snapshot) {
  auto entries = model.state_entries();
  for (size_t i = 0; i < entries.size(); ++i) *entries[i].tensor = snapshot[i];
}

}  // namespace detail

// Deterministic mini-batch training. The shuffle, batch assembly, and gradient
// reductions are all order-fixed, so one seed yields one weight vector. When a
// validation set is given, the model ends holding the best-validation epoch's
// weights (ties keep the earlier epoch).
template <typename T>
TrainResult train(Model<T>& model, const Dataset<T>& train_set,
                  const Dataset<T>& val_set, const TrainOptions& options) {
  if (train_set.size() < 2)
    fail(ErrorCode::empty_dataset, "training needs at least one batch of 2");
  if (train_set.size() != train_set.labels.size())
    fail(ErrorCode::shape_mismatch, "dataset input/label count mismatch");

  Adam<T> optimizer(AdamOptions{.lr = options.lr});
  std::mt19937_64 rng(options.seed);
  std::vector<size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), size_t(0));

  TrainResult result;
  std::vector<Tensor<T>> best_state;
  const auto params = model.params();

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    int64_t seen = 0, correct = 0;
    for (size_t begin = 0; begin < train_set.size();
         begin += size_t(options.batch)) {
      size_t end = std::min(train_set.size(), begin + size_t(options.batch));
      if (end - begin < 2) break;  // batchnorm needs >= 2 items

      Tensor<T> x = stack_batch(train_set, order, begin, end);
      std::vector<int> labels(end - begin);
      for (size_t i = begin; i < end; ++i)
        labels[i - begin] = train_set.labels[order[i]];

      model.zero_grads();
      Tensor<T> logits = model.forward(x, Phase::train);
      Tensor<T> probs = softmax(logits);
      const double loss = cross_entropy(probs, labels);
      model.backward(softmax_cross_entropy_backward(probs, labels));
      optimizer.step(params);

      loss_sum += loss * double(end - begin);
      seen += int64_t(end - begin);
      for (size_t i = 0; i < end - begin; ++i) {
        int argmax = 0;
        for (int j = 1; j < probs.dim(1); ++j)
          if (probs.at2(int(i), j) > probs.at2(int(i), argmax)) argmax = j;
        if (argmax == labels[i]) ++correct;
      }
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = seen > 0 ? loss_sum / double(seen) : 0.0;
    entry.train_acc = seen > 0 ? double(correct) / double(seen) : 0.0;
    if (val_set.size() > 0) {
      const auto stats = evaluate(model, val_set, options.batch);
      entry.val_loss = stats.loss;
      entry.val_acc = stats.accuracy;
      if (result.best_epoch < 0 || stats.accuracy > result.best_val_acc) {
        result.best_epoch = epoch;
        result.best_val_acc = stats.accuracy;
        best_state = detail::snapshot_state(model);
      }
    }
    result.log.push_back(entry);
    if (options.verbose) {
      std::fprintf(stderr,
                   "epoch %d train_loss %.4f train_acc %.4f val_acc %.4f\n",
                   epoch, entry.train_loss, entry.train_acc, entry.val_acc);
    }
    if (options.early_stop_val_acc >= 0.0 && val_set.size() > 0 &&
        entry.val_acc >= options.early_stop_val_acc)
      break;
  }

  if (!best_state.empty()) detail::restore_state(model, best_state);
  if (result.best_epoch < 0 && !result.log.empty())
    result.best_epoch = result.log.back().epoch;
  return result;
}

}  // namespace apneakit::nn
