#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "docconv/model.hpp"
#include "docconv/text.hpp"

namespace docconv {

struct TrainOptions {
  double learning_rate = 0.05;
  double l2 = 1e-5;        // on weights and embeddings, not biases, not PAD
  double dropout = 0.0;    // on the document embedding
  std::size_t batch_size = 16;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;
  std::size_t threads = 1;
  // Leave every bias at its initial value. With tanh feature maps this keeps
  // zero input mapped to zero, which pushes the model to detect both classes.
  bool train_biases = true;
  // Stop early once an end-of-epoch accuracy reaches the target.
  std::optional<double> stop_at_train_accuracy;
  std::optional<double> stop_at_validation_accuracy;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;          // mean minibatch loss during the epoch
  double train_accuracy = 0.0;      // end-of-epoch, inference mode
  double validation_accuracy = 0.0; // end-of-epoch; NaN-free 0 when no validation split
};

struct TrainResult {
  ModelParams params;  // snapshot with the best validation (or train) accuracy
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  std::size_t train_size = 0;
  std::size_t validation_size = 0;
};

/// Adagrad with L2 weight decay:
///   g <- grad + l2 * w (weights only);  G += g^2;  w -= lr * g / (sqrt(G) + eps)
/// The embedding accumulator is dense but data gradients are sparse; decay
/// touches every non-PAD column.
class Adagrad {
 public:
  Adagrad(const ModelParams& params, double learning_rate, double l2, double epsilon = 1e-8,
          bool train_biases = true);
  void step(ModelParams& params, const ModelGradients& grads);

 private:
  double learning_rate_;
  double l2_;
  double epsilon_;
  bool train_biases_;
  std::vector<std::vector<double>> accum_;  // aligned with parameter_blocks()
};

/// Deterministic train/validation partition of [0, n): a seeded shuffle,
/// with the first round(fraction * n) indices (at least one when fraction > 0
/// and n > 1) held out. Both parts are returned sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_validation(
    std::size_t n, double fraction, std::uint64_t seed);

/// Minibatch training on the labelled documents of `corpus`. Throws
/// NumericError (with epoch, batch and parameter norms) on a non-finite loss.
/// For a fixed seed the result is bit-identical for any thread count.
TrainResult train(const Corpus& corpus, ModelParams initial, const TrainOptions& options,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

struct Evaluation {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
  double error_rate() const { return 1.0 - accuracy; }
};

Evaluation evaluate(std::span<const Document> docs, const ModelParams& params);
Evaluation evaluate(const Corpus& corpus, const ModelParams& params);

}  // namespace docconv
