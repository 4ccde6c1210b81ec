#include "docconv/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "docconv/errors.hpp"
#include "docconv/random.hpp"

namespace docconv {

PseudoLabel make_pseudo_label(std::span<const double> probabilities) {
  if (probabilities.size() < 2) {
    throw ConfigError("pseudo-labels need at least two classes, model has " +
                      std::to_string(probabilities.size()));
  }
  PseudoLabel out;
  out.probabilities.assign(probabilities.begin(), probabilities.end());
  out.predicted = static_cast<std::size_t>(
      std::max_element(probabilities.begin(), probabilities.end()) - probabilities.begin());
  bool found = false;
  for (std::size_t c = 0; c < probabilities.size(); ++c) {
    if (c == out.predicted) continue;
    if (!found || probabilities[c] < probabilities[out.label]) {
      out.label = c;
      found = true;
    }
  }
  return out;
}

SaliencyMap compute_saliency(const Document& doc, const ModelParams& params, SentenceScoreMode mode) {
  const DocForwardTrace trace = forward(doc, params);
  SaliencyMap map;
  map.pseudo = make_pseudo_label(trace.probabilities);
  const BackwardResult grads = backward(trace, map.pseudo.label, params);

  map.words.reserve(grads.word_grads.size());
  for (const Matrix& g : grads.word_grads) {
    std::vector<double> scores(g.cols(), 0.0);
    for (std::size_t j = 0; j < g.cols(); ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < g.rows(); ++r) s += g(r, j) * g(r, j);
      scores[j] = std::sqrt(s);
    }
    map.words.push_back(std::move(scores));
  }

  const Matrix& e = trace.doc_matrix;
  const Matrix& g = grads.doc_matrix_grad;
  map.sentences.assign(e.cols(), 0.0);
  for (std::size_t s = 0; s < e.cols(); ++s) {
    double acc = 0.0;
    for (std::size_t r = 0; r < e.rows(); ++r) {
      const double prod = g(r, s) * e(r, s);
      acc += mode == SentenceScoreMode::inner_product ? prod : std::abs(prod);
    }
    map.sentences[s] = std::abs(acc);
  }
  return map;
}

std::vector<std::vector<double>> word_saliency(const Document& doc, const ModelParams& params) {
  return compute_saliency(doc, params).words;
}

std::vector<double> sentence_saliency(const Document& doc, const ModelParams& params, SentenceScoreMode mode) {
  return compute_saliency(doc, params, mode).sentences;
}

// ---------------------------------------------------------------------------

Budget Budget::fraction(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("summary proportion must lie in (0, 1]");
  return Budget{Kind::proportion, p, 0};
}

Budget Budget::pick(std::size_t m) {
  if (m == 0) throw ConfigError("fixed summary budget must be at least 1");
  return Budget{Kind::fixed, 0.0, m};
}

std::size_t Budget::resolve(std::size_t sentences) const {
  if (sentences == 0) return 0;
  if (kind == Kind::fixed) return std::min(count, sentences);
  const auto m = static_cast<std::size_t>(std::ceil(proportion * static_cast<double>(sentences) - 1e-9));
  return std::clamp<std::size_t>(m, 1, sentences);
}

std::string Budget::label() const {
  if (kind == Kind::fixed) return "Pick " + std::to_string(count);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.0f%%", proportion * 100.0);
  return buf;
}

std::string_view method_name(SummaryMethod method) {
  switch (method) {
    case SummaryMethod::saliency: return "saliency";
    case SummaryMethod::random: return "random";
    case SummaryMethod::first_last: return "first_last";
  }
  return "saliency";
}

Summary summarize(std::span<const double> sentence_scores, const Budget& budget) {
  const std::size_t n = sentence_scores.size();
  const std::size_t m = budget.resolve(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sentence_scores[a] > sentence_scores[b];
  });
  Summary s{{order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m)}, budget, SummaryMethod::saliency};
  std::sort(s.selected.begin(), s.selected.end());
  return s;
}

Summary random_summary(std::size_t sentences, const Budget& budget, std::uint64_t seed) {
  std::vector<std::size_t> order(sentences);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  order.resize(budget.resolve(sentences));
  std::sort(order.begin(), order.end());
  return Summary{std::move(order), budget, SummaryMethod::random};
}

Summary first_last_summary(std::size_t sentences) {
  Summary s{{}, Budget::pick(2), SummaryMethod::first_last};
  if (sentences >= 1) s.selected.push_back(0);
  if (sentences >= 2) s.selected.push_back(sentences - 1);
  return s;
}

// ---------------------------------------------------------------------------

ReportFormat parse_report_format(std::string_view name) {
  if (name == "ansi") return ReportFormat::ansi;
  if (name == "html") return ReportFormat::html;
  if (name == "json") return ReportFormat::json;
  throw ConfigError("unknown report format '" + std::string(name) + "' (expected ansi, html or json)");
}

namespace {

std::string word_text(const Document& doc, const Vocabulary& vocab, std::size_t s, std::size_t j) {
  if (s < doc.tokens.size() && j < doc.tokens[s].size()) return doc.tokens[s][j];
  return vocab.token(doc.sentences[s][j]);
}

std::string sentence_text(const Document& doc, const Vocabulary& vocab, std::size_t s) {
  if (s < doc.sentence_text.size()) return doc.sentence_text[s];
  std::string out;
  for (std::size_t j = 0; j < doc.sentences[s].size(); ++j) {
    if (j > 0) out.push_back(' ');
    out += word_text(doc, vocab, s, j);
  }
  return out;
}

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void check_alignment(const Document& doc, const SaliencyMap& map) {
  if (map.words.size() != doc.sentences.size() || map.sentences.size() != doc.sentences.size()) {
    throw ConfigError("saliency map does not align with document '" + doc.source_id + "'");
  }
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    if (map.words[s].size() != doc.sentences[s].size()) {
      throw ConfigError("word saliency does not align with sentence " + std::to_string(s));
    }
  }
}

std::vector<bool> selection_mask(const Summary& summary, std::size_t n) {
  std::vector<bool> mask(n, false);
  for (std::size_t i : summary.selected) {
    if (i < n) mask[i] = true;
  }
  return mask;
}

std::string render_html(const Document& doc, const Vocabulary& vocab, const SaliencyMap& map,
                        const Summary& summary) {
  const auto selected = selection_mask(summary, doc.sentences.size());
  double top = 0.0;
  for (const auto& s : map.words) {
    for (double v : s) top = std::max(top, v);
  }
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>" << html_escape(doc.source_id) << "</title>\n"
      << "<style>\n.sentence.selected { background: #fff3b0; }\n"
      << ".word { border-radius: 2px; }\n</style>\n</head>\n<body>\n";
  out << "<p class=\"meta\">predicted class " << map.pseudo.predicted << " (p="
      << fixed(map.pseudo.probabilities.empty() ? 0.0 : map.pseudo.probabilities[map.pseudo.predicted], 4)
      << "), pseudo-label " << map.pseudo.label << "</p>\n<p class=\"document\">\n";
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    out << "<span class=\"sentence" << (selected[s] ? " selected" : "") << "\" data-index=\"" << s
        << "\" data-score=\"" << fixed(map.sentences[s], 6) << "\">";
    for (std::size_t j = 0; j < doc.sentences[s].size(); ++j) {
      const double shade = top > 0.0 ? map.words[s][j] / top : 0.0;
      out << (j > 0 ? " " : "") << "<span class=\"word\" style=\"background: rgba(220, 40, 40, "
          << fixed(shade, 3) << ")\">" << html_escape(word_text(doc, vocab, s, j)) << "</span>";
    }
    out << "</span>\n";
  }
  out << "</p>\n</body>\n</html>\n";
  return out.str();
}

std::string render_ansi(const Document& doc, const Vocabulary& vocab, const SaliencyMap& map,
                        const Summary& summary) {
  const auto selected = selection_mask(summary, doc.sentences.size());
  std::ostringstream out;
  out << doc.source_id << ": predicted class " << map.pseudo.predicted << ", pseudo-label "
      << map.pseudo.label << "\n";
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    out << "[" << fixed(map.sentences[s], 4) << "] ";
    if (selected[s]) out << "\x1b[1;33m";
    out << sentence_text(doc, vocab, s);
    if (selected[s]) out << "\x1b[0m";
    out << "\n";
  }
  return out.str();
}

}  // namespace

nlohmann::json saliency_json(const Document& doc, const Vocabulary& vocab, const SaliencyMap& map,
                             const Summary& summary) {
  check_alignment(doc, map);
  const auto selected = selection_mask(summary, doc.sentences.size());
  nlohmann::json j;
  j["source_id"] = doc.source_id;
  j["prediction"] = {{"class", map.pseudo.predicted}, {"probabilities", map.pseudo.probabilities}};
  j["pseudo_label"] = map.pseudo.label;
  auto sentences = nlohmann::json::array();
  auto words = nlohmann::json::array();
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    sentences.push_back({{"index", s},
                         {"text", sentence_text(doc, vocab, s)},
                         {"score", map.sentences[s]},
                         {"selected", static_cast<bool>(selected[s])}});
    for (std::size_t w = 0; w < doc.sentences[s].size(); ++w) {
      words.push_back({{"sentence_index", s},
                       {"position", w},
                       {"token", word_text(doc, vocab, s, w)},
                       {"score", map.words[s][w]}});
    }
  }
  j["sentences"] = std::move(sentences);
  j["words"] = std::move(words);
  return j;
}

std::string render_saliency(const Document& doc, const Vocabulary& vocab, const SaliencyMap& map,
                            const Summary& summary, ReportFormat format) {
  check_alignment(doc, map);
  switch (format) {
    case ReportFormat::json: return saliency_json(doc, vocab, map, summary).dump(2) + "\n";
    case ReportFormat::html: return render_html(doc, vocab, map, summary);
    case ReportFormat::ansi: return render_ansi(doc, vocab, map, summary);
  }
  throw ConfigError("unknown report format");
}

}  // namespace docconv
