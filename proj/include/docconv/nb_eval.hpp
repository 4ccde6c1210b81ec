#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "docconv/model.hpp"
#include "docconv/saliency.hpp"
#include "docconv/text.hpp"

namespace docconv {

using SparseVector = std::vector<std::pair<TokenId, double>>;  // sorted by id

// Token ids of the selected sentences; every sentence when `selected` is null.
std::vector<TokenId> gather_tokens(const Document& doc, const std::vector<std::size_t>* selected = nullptr);

/// idf(t) = ln((1 + N) / (1 + df(t))) + 1 with raw term counts as tf.
struct TfIdfModel {
  std::vector<std::size_t> document_frequency;
  std::size_t documents = 0;

  std::size_t vocab_size() const noexcept { return document_frequency.size(); }
  double idf(TokenId id) const;
  // Tokens never seen in training (df = 0) and PAD are dropped.
  SparseVector transform(std::span<const TokenId> tokens) const;
};

TfIdfModel fit_tfidf(std::span<const Document> docs, std::size_t vocab_size);

/// Multinomial naive Bayes over TF-IDF weights with Laplace smoothing.
struct NaiveBayesModel {
  std::vector<double> log_prior;               // per class
  std::vector<std::vector<double>> log_theta;  // [class][token]
  double alpha = 1.0;

  std::size_t classes() const noexcept { return log_prior.size(); }
  std::vector<double> scores(const SparseVector& x) const;
  // Argmax of scores(), lowest class on ties.
  std::size_t classify(const SparseVector& x) const;
};

// Throws DataError if any class has no training documents.
NaiveBayesModel train_naive_bayes(std::span<const Document> docs, const TfIdfModel& tfidf,
                                  std::size_t classes, double alpha = 1.0);

struct Table3Row {
  std::string label;
  double summary_accuracy = 0.0;
  double random_accuracy_mean = 0.0;
  std::vector<double> random_accuracy;  // one per seed
  double margin() const noexcept { return summary_accuracy - random_accuracy_mean; }
};

struct Table3Options {
  std::vector<Budget> budgets;  // empty: 50/33/25/20% and Pick 5/4/3/2
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  SentenceScoreMode mode = SentenceScoreMode::inner_product;
  bool include_full = true;
  bool include_first_last = true;
};

std::vector<Budget> default_budgets();

struct Table3 {
  double full_accuracy = 0.0;
  std::vector<Table3Row> rows;         // in budget order
  std::optional<double> first_last_accuracy;
};

/// Trains the classifier on full training documents, then classifies test
/// documents reduced to saliency summaries and to random summaries of the
/// same size.
Table3 run_table3(const ModelParams& params, const Corpus& train, const Corpus& test,
                  const Table3Options& options = {});

std::string format_table3(const Table3& table);
nlohmann::json table3_json(const Table3& table);

}  // namespace docconv
