#include "docconv/nb_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "docconv/errors.hpp"
#include "docconv/log.hpp"

namespace docconv {

std::vector<TokenId> gather_tokens(const Document& doc, const std::vector<std::size_t>* selected) {
  std::vector<TokenId> out;
  auto append = [&](std::size_t s) {
    if (s < doc.sentences.size()) out.insert(out.end(), doc.sentences[s].begin(), doc.sentences[s].end());
  };
  if (selected) {
    for (std::size_t s : *selected) append(s);
  } else {
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) append(s);
  }
  return out;
}

double TfIdfModel::idf(TokenId id) const {
  const double df = id < document_frequency.size() ? static_cast<double>(document_frequency[id]) : 0.0;
  return std::log((1.0 + static_cast<double>(documents)) / (1.0 + df)) + 1.0;
}

SparseVector TfIdfModel::transform(std::span<const TokenId> tokens) const {
  std::map<TokenId, std::size_t> counts;
  for (TokenId t : tokens) {
    if (t == Vocabulary::kPad || t >= document_frequency.size() || document_frequency[t] == 0) continue;
    ++counts[t];
  }
  SparseVector x;
  x.reserve(counts.size());
  for (const auto& [t, c] : counts) x.emplace_back(t, static_cast<double>(c) * idf(t));
  return x;
}

TfIdfModel fit_tfidf(std::span<const Document> docs, std::size_t vocab_size) {
  TfIdfModel m;
  m.document_frequency.assign(vocab_size, 0);
  m.documents = docs.size();
  std::vector<TokenId> ids;
  for (const auto& d : docs) {
    ids = gather_tokens(d);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (TokenId t : ids) {
      if (t >= vocab_size) {
        throw DataError("document '" + d.source_id + "' has token id " + std::to_string(t) +
                        " outside a vocabulary of " + std::to_string(vocab_size));
      }
      ++m.document_frequency[t];
    }
  }
  return m;
}

std::vector<double> NaiveBayesModel::scores(const SparseVector& x) const {
  std::vector<double> s = log_prior;
  for (std::size_t c = 0; c < s.size(); ++c) {
    for (const auto& [t, w] : x) {
      if (t < log_theta[c].size()) s[c] += w * log_theta[c][t];
    }
  }
  return s;
}

std::size_t NaiveBayesModel::classify(const SparseVector& x) const {
  const auto s = scores(x);
  return static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
}

NaiveBayesModel train_naive_bayes(std::span<const Document> docs, const TfIdfModel& tfidf, std::size_t classes,
                                  double alpha) {
  if (classes < 2) throw ConfigError("naive Bayes needs at least two classes");
  if (!(alpha > 0.0)) throw ConfigError("naive Bayes smoothing must be positive");
  const std::size_t V = tfidf.vocab_size();
  std::vector<std::size_t> doc_counts(classes, 0);
  std::vector<std::vector<double>> mass(classes, std::vector<double>(V, 0.0));
  for (const auto& d : docs) {
    if (!d.label) continue;
    if (*d.label >= classes) {
      throw DataError("document '" + d.source_id + "' has label " + std::to_string(*d.label) + " but only " +
                      std::to_string(classes) + " classes exist");
    }
    ++doc_counts[*d.label];
    for (const auto& [t, w] : tfidf.transform(gather_tokens(d))) mass[*d.label][t] += w;
  }
  const double total_docs = static_cast<double>(std::accumulate(doc_counts.begin(), doc_counts.end(), std::size_t{0}));
  NaiveBayesModel nb;
  nb.alpha = alpha;
  for (std::size_t c = 0; c < classes; ++c) {
    if (doc_counts[c] == 0) {
      throw DataError("class " + std::to_string(c) + " has no training documents for naive Bayes");
    }
    nb.log_prior.push_back(std::log(static_cast<double>(doc_counts[c]) / total_docs));
    const double total = std::accumulate(mass[c].begin(), mass[c].end(), 0.0);
    const double denom = std::log(total + alpha * static_cast<double>(V));
    std::vector<double> theta(V);
    for (std::size_t t = 0; t < V; ++t) theta[t] = std::log(mass[c][t] + alpha) - denom;
    nb.log_theta.push_back(std::move(theta));
  }
  return nb;
}

std::vector<Budget> default_budgets() {
  return {Budget::fraction(0.5),  Budget::fraction(1.0 / 3.0), Budget::fraction(0.25), Budget::fraction(0.2),
          Budget::pick(5),        Budget::pick(4),             Budget::pick(3),         Budget::pick(2)};
}

Table3 run_table3(const ModelParams& params, const Corpus& train, const Corpus& test, const Table3Options& options) {
  if (options.seeds.empty()) throw ConfigError("random baseline needs at least one seed");
  const auto budgets = options.budgets.empty() ? default_budgets() : options.budgets;
  const TfIdfModel tfidf = fit_tfidf(train.documents, train.vocabulary.size());
  const NaiveBayesModel nb = train_naive_bayes(train.documents, tfidf, std::max(train.class_count, test.class_count));

  std::vector<const Document*> labelled;
  for (const auto& d : test.documents) {
    if (d.label) labelled.push_back(&d);
  }
  if (labelled.empty()) throw DataError("test corpus has no labelled documents");
  const double n = static_cast<double>(labelled.size());

  auto correct = [&](const Document& d, const std::vector<std::size_t>* sel) {
    return nb.classify(tfidf.transform(gather_tokens(d, sel))) == *d.label ? 1.0 : 0.0;
  };

  // Saliency depends only on the document, so compute it once.
  std::vector<std::vector<double>> scores;
  scores.reserve(labelled.size());
  for (const Document* d : labelled) scores.push_back(sentence_saliency(*d, params, options.mode));

  Table3 table;
  if (options.include_full) {
    double acc = 0.0;
    for (const Document* d : labelled) acc += correct(*d, nullptr);
    table.full_accuracy = acc / n;
  }
  for (const Budget& b : budgets) {
    Table3Row row;
    row.label = b.label();
    double acc = 0.0;
    for (std::size_t i = 0; i < labelled.size(); ++i) {
      const Summary s = summarize(scores[i], b);
      acc += correct(*labelled[i], &s.selected);
    }
    row.summary_accuracy = acc / n;
    for (std::uint64_t seed : options.seeds) {
      double racc = 0.0;
      for (std::size_t i = 0; i < labelled.size(); ++i) {
        // Independent stream per (seed, document) so results do not depend on order.
        const Summary s = random_summary(labelled[i]->sentences.size(), b, seed * 0x9E3779B97F4A7C15ULL + i);
        racc += correct(*labelled[i], &s.selected);
      }
      row.random_accuracy.push_back(racc / n);
    }
    row.random_accuracy_mean =
        std::accumulate(row.random_accuracy.begin(), row.random_accuracy.end(), 0.0) /
        static_cast<double>(row.random_accuracy.size());
    log_info(row.label + ": summary " + std::to_string(row.summary_accuracy) + ", random " +
             std::to_string(row.random_accuracy_mean));
    table.rows.push_back(std::move(row));
  }
  if (options.include_first_last) {
    double acc = 0.0;
    for (const Document* d : labelled) {
      const Summary s = first_last_summary(d->sentences.size());
      acc += correct(*d, &s.selected);
    }
    table.first_last_accuracy = acc / n;
  }
  return table;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

std::string format_table3(const Table3& table) {
  std::ostringstream out;
  out << pad("budget", 10) << pad("summary", 10) << pad("random", 10) << pad("margin", 10) << "\n";
  out << pad("100%", 10) << pad(pct(table.full_accuracy), 10) << pad("-", 10) << pad("-", 10) << "\n";
  for (const auto& r : table.rows) {
    out << pad(r.label, 10) << pad(pct(r.summary_accuracy), 10) << pad(pct(r.random_accuracy_mean), 10)
        << pad(pct(r.margin()), 10) << "\n";
  }
  if (table.first_last_accuracy) {
    out << pad("first+last", 10) << pad(pct(*table.first_last_accuracy), 10) << pad("-", 10) << pad("-", 10)
        << "\n";
  }
  return out.str();
}

nlohmann::json table3_json(const Table3& table) {
  nlohmann::json j;
  j["full_accuracy"] = table.full_accuracy;
  auto rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"budget", r.label},
                    {"summary_acc", r.summary_accuracy},
                    {"random_acc_mean", r.random_accuracy_mean},
                    {"random_seeds", r.random_accuracy},
                    {"margin", r.margin()}});
  }
  j["rows"] = std::move(rows);
  if (table.first_last_accuracy) j["first_last_accuracy"] = *table.first_last_accuracy;
  return j;
}

}  // namespace docconv
