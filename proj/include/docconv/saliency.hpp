#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "docconv/model.hpp"
#include "docconv/text.hpp"

namespace docconv {

/// The label the network disagrees with most: for two classes the one it
/// did not predict, otherwise the least probable class (lowest index on ties).
struct PseudoLabel {
  std::size_t label = 0;
  std::size_t predicted = 0;
  std::vector<double> probabilities;
};

PseudoLabel make_pseudo_label(std::span<const double> probabilities);

enum class SentenceScoreMode {
  inner_product,  // |g . e|
  elementwise,    // sum_i |g_i * e_i|
};

/// Importance scores from one backward pass of the cross-entropy loss taken
/// at the pseudo-label. Word scores are the Euclidean norm of the loss
/// gradient at each word's embedding column; sentence scores combine the
/// gradient at each sentence embedding with the embedding itself.
struct SaliencyMap {
  std::vector<std::vector<double>> words;  // aligned with Document::sentences
  std::vector<double> sentences;
  PseudoLabel pseudo;
};

SaliencyMap compute_saliency(const Document& doc, const ModelParams& params,
                             SentenceScoreMode mode = SentenceScoreMode::inner_product);

std::vector<std::vector<double>> word_saliency(const Document& doc, const ModelParams& params);
std::vector<double> sentence_saliency(const Document& doc, const ModelParams& params,
                                      SentenceScoreMode mode = SentenceScoreMode::inner_product);

// ---------------------------------------------------------------------------
// Extractive summaries
// ---------------------------------------------------------------------------

/// Either a proportion p of the sentences (max(1, ceil(p * n))) or a fixed
/// count m (min(m, n)).
struct Budget {
  enum class Kind { proportion, fixed };
  Kind kind = Kind::proportion;
  double proportion = 0.2;
  std::size_t count = 0;

  static Budget fraction(double p);
  static Budget pick(std::size_t m);

  std::size_t resolve(std::size_t sentences) const;
  // "20%", "33%" or "Pick 3".
  std::string label() const;

  friend bool operator==(const Budget&, const Budget&) = default;
};

enum class SummaryMethod { saliency, random, first_last };

std::string_view method_name(SummaryMethod method);

struct Summary {
  std::vector<std::size_t> selected;  // strictly increasing
  Budget budget;
  SummaryMethod method = SummaryMethod::saliency;
};

// Top-scoring sentences (lower index wins ties), returned in document order.
Summary summarize(std::span<const double> sentence_scores, const Budget& budget);

// Uniform without replacement, in document order.
Summary random_summary(std::size_t sentences, const Budget& budget, std::uint64_t seed);

Summary first_last_summary(std::size_t sentences);

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

enum class ReportFormat { ansi, html, json };

// Throws ConfigError for anything but "ansi", "html" or "json".
ReportFormat parse_report_format(std::string_view name);

/// JSON schema:
///   { source_id, prediction: {class, probabilities[]}, pseudo_label,
///     sentences: [{index, text, score, selected}],
///     words: [{sentence_index, position, token, score}] }
nlohmann::json saliency_json(const Document& doc, const Vocabulary& vocab, const SaliencyMap& map,
                             const Summary& summary);

std::string render_saliency(const Document& doc, const Vocabulary& vocab, const SaliencyMap& map,
                            const Summary& summary, ReportFormat format);

}  // namespace docconv
