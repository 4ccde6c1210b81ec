#include "docconv/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "docconv/errors.hpp"
#include "docconv/random.hpp"

namespace docconv {

void TrainOptions::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (!(l2 >= 0.0)) throw ConfigError("l2 strength must be non-negative");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  if (threads == 0) throw ConfigError("thread count must be positive");
}

Adagrad::Adagrad(const ModelParams& params, double learning_rate, double l2, double epsilon, bool train_biases)
    : learning_rate_(learning_rate), l2_(l2), epsilon_(epsilon), train_biases_(train_biases) {
  auto copy = params;
  for (const auto& block : parameter_blocks(copy)) accum_.emplace_back(block.values.size(), 0.0);
}

void Adagrad::step(ModelParams& params, const ModelGradients& grads) {
  auto blocks = parameter_blocks(params);
  const std::size_t dim = params.embedding.rows();

  auto update = [&](double& w, double& acc, double g) {
    acc += g * g;
    if (acc > 0.0) w -= learning_rate_ * g / (std::sqrt(acc) + epsilon_);
  };

  // Embedding: block 0, column-wise. Row-major storage means (r, c) sits at
  // r * vocab + c.
  {
    auto& acc = accum_[0];
    auto values = blocks[0].values;
    const std::size_t vocab = params.embedding.cols();
    auto it = grads.embedding.begin();
    for (std::size_t c = 0; c < vocab; ++c) {
      const std::vector<double>* col = nullptr;
      if (it != grads.embedding.end() && it->first == c) {
        col = &it->second;
        ++it;
      }
      if (c == Vocabulary::kPad) continue;
      if (col == nullptr && l2_ == 0.0) continue;
      for (std::size_t r = 0; r < dim; ++r) {
        const std::size_t i = r * vocab + c;
        double g = l2_ * values[i];
        if (col != nullptr) g += (*col)[r];
        update(values[i], acc[i], g);
      }
    }
  }

  std::vector<std::span<const double>> grad_blocks{{}};
  for (const auto* banks : {&grads.sentence_banks, &grads.document_banks}) {
    for (const auto& bank : *banks) {
      grad_blocks.push_back(bank.weights());
      grad_blocks.push_back(bank.bias());
    }
  }
  grad_blocks.push_back(grads.head_weights.values());
  grad_blocks.push_back(grads.head_bias);
  for (std::size_t b = 1; b < blocks.size(); ++b) {
    if (!train_biases_ && !blocks[b].weight_decay) continue;
    auto values = blocks[b].values;
    const double decay = blocks[b].weight_decay ? l2_ : 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      update(values[i], accum_[b][i], grad_blocks[b][i] + decay * values[i]);
    }
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_validation(
    std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed ^ 0x5bd1e9955bd1e995ULL);
  rng.shuffle(order);
  std::size_t held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (fraction > 0.0 && n > 1) held = std::max<std::size_t>(held, 1);
  held = std::min(held, n > 0 ? n - 1 : 0);
  std::vector<std::size_t> validation(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> training(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(validation.begin(), validation.end());
  std::sort(training.begin(), training.end());
  return {std::move(training), std::move(validation)};
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string norms_report(ModelParams& params) {
  std::ostringstream out;
  bool first = true;
  for (const auto& block : parameter_blocks(params)) {
    out << (first ? "" : ", ") << block.name << "=" << l2_norm(block.values);
    first = false;
  }
  return out.str();
}

double accuracy_of(const std::vector<const Document*>& docs, const ModelParams& params) {
  if (docs.empty()) return 0.0;
  std::size_t correct = 0;
  for (const Document* d : docs) {
    if (predict(*d, params).label == *d->label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(docs.size());
}

}  // namespace

TrainResult train(const Corpus& corpus, ModelParams initial, const TrainOptions& options,
                  const std::function<void(const EpochStats&)>& on_epoch) {
  options.validate();
  validate_params(initial);

  std::vector<const Document*> labelled;
  for (const auto& d : corpus.documents) {
    if (!d.label) continue;
    if (*d.label >= initial.config.classes) {
      throw DataError("document '" + d.source_id + "' has label " + std::to_string(*d.label) +
                      " outside the model's " + std::to_string(initial.config.classes) + " classes");
    }
    labelled.push_back(&d);
  }
  if (labelled.empty()) throw DataError("training corpus has no labelled documents");

  auto [train_idx, val_idx] = split_validation(labelled.size(), options.validation_fraction, options.seed);
  std::vector<const Document*> train_docs, val_docs;
  for (auto i : train_idx) train_docs.push_back(labelled[i]);
  for (auto i : val_idx) val_docs.push_back(labelled[i]);

  TrainResult result{initial, {}, 0, train_docs.size(), val_docs.size()};
  ModelParams params = std::move(initial);
  Adagrad optimizer(params, options.learning_rate, options.l2, 1e-8, options.train_biases);
  Rng shuffler(options.seed);
  double best_score = -1.0;
  double best_loss = 0.0;

  std::vector<std::size_t> order(train_docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    shuffler.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      const std::size_t count = end - start;

      std::vector<BackwardResult> results(count);
      auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          const std::size_t pos = order[start + i];
          const Document& doc = *train_docs[pos];
          Rng rng(mix(options.seed ^ mix(epoch * 0x100000001ULL + pos)));
          ForwardOptions fo{options.dropout, &rng};
          DocForwardTrace trace = forward(doc, params, fo);
          results[i] = backward(trace, *doc.label, params);
        }
      };
      const std::size_t workers = std::min(options.threads, count);
      if (workers <= 1) {
        work(0, count);
      } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (count + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
          const std::size_t lo = w * chunk;
          const std::size_t hi = std::min(count, lo + chunk);
          if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (auto& t : pool) t.join();
      }

      // Ordered reduction keeps the sum bit-identical across thread counts.
      ModelGradients total = ModelGradients::zeros_like(params);
      double batch_loss = 0.0;
      for (auto& r : results) {
        total.add(r.params);
        batch_loss += r.loss;
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_no) + "; parameter norms: " + norms_report(params));
      }
      loss_sum += batch_loss;
      total.scale(1.0 / static_cast<double>(count));
      optimizer.step(params, total);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(1, train_docs.size()));
    stats.train_accuracy = accuracy_of(train_docs, params);
    stats.validation_accuracy = accuracy_of(val_docs, params);
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);

    // Accuracy ties go to the epoch with the lower training loss.
    const double score = val_docs.empty() ? stats.train_accuracy : stats.validation_accuracy;
    if (score > best_score || (score == best_score && stats.train_loss < best_loss)) {
      best_score = score;
      best_loss = stats.train_loss;
      result.params = params;
      result.best_epoch = epoch;
    }
    if (options.stop_at_train_accuracy && stats.train_accuracy >= *options.stop_at_train_accuracy) break;
    if (options.stop_at_validation_accuracy && !val_docs.empty() &&
        stats.validation_accuracy >= *options.stop_at_validation_accuracy) {
      break;
    }
  }
  if (result.best_epoch == 0) result.params = std::move(params);
  return result;
}

Evaluation evaluate(std::span<const Document> docs, const ModelParams& params) {
  Evaluation e;
  const std::size_t classes = params.config.classes;
  e.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  for (const auto& d : docs) {
    if (!d.label) continue;
    const std::size_t predicted = predict(d, params).label;
    ++e.total;
    if (predicted == *d.label) ++e.correct;
    if (*d.label < classes) ++e.confusion[*d.label][predicted];
  }
  e.accuracy = e.total == 0 ? 0.0 : static_cast<double>(e.correct) / static_cast<double>(e.total);
  return e;
}

Evaluation evaluate(const Corpus& corpus, const ModelParams& params) {
  return evaluate(std::span<const Document>(corpus.documents), params);
}

}  // namespace docconv
