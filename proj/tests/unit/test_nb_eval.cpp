#include <doctest.h>

#include <cmath>
#include <map>

#include "docconv/errors.hpp"
#include "docconv/nb_eval.hpp"
#include "docconv/synthetic.hpp"

using namespace docconv;

namespace {

Document doc(std::vector<TokenId> tokens, std::size_t label) {
  Document d;
  d.source_id = "d";
  d.label = label;
  d.sentences = {std::move(tokens)};
  return d;
}

double feature(const SparseVector& x, TokenId t) {
  for (const auto& [id, w] : x) {
    if (id == t) return w;
  }
  return 0.0;
}

// Posterior class from first principles: counts, smoothed idf and the
// multinomial likelihood, recomputed without the library's models.
std::size_t brute_force_class(const std::vector<Document>& train, const Document& d, std::size_t vocab) {
  const double n = static_cast<double>(train.size());
  std::vector<double> df(vocab, 0.0);
  for (const auto& t : train) {
    std::vector<bool> seen(vocab, false);
    for (const auto& s : t.sentences) {
      for (TokenId id : s) seen[id] = true;
    }
    for (std::size_t i = 0; i < vocab; ++i) df[i] += seen[i] ? 1.0 : 0.0;
  }
  auto weights = [&](const Document& x) {
    std::map<TokenId, double> w;
    for (const auto& s : x.sentences) {
      for (TokenId id : s) {
        if (id != 0 && df[id] > 0) w[id] += std::log((1 + n) / (1 + df[id])) + 1;
      }
    }
    return w;
  };
  std::vector<double> prior(2, 0.0);
  std::vector<std::vector<double>> mass(2, std::vector<double>(vocab, 0.0));
  for (const auto& t : train) {
    prior[*t.label] += 1.0;
    for (const auto& [id, w] : weights(t)) mass[*t.label][id] += w;
  }
  std::vector<double> score(2);
  for (std::size_t c = 0; c < 2; ++c) {
    double total = 0.0;
    for (double m : mass[c]) total += m;
    score[c] = std::log(prior[c] / n);
    for (const auto& [id, w] : weights(d)) score[c] += w * std::log((mass[c][id] + 1.0) / (total + vocab));
  }
  return score[1] > score[0] ? 1 : 0;
}

Corpus synthetic(std::size_t documents, std::uint64_t seed, const Vocabulary* vocab = nullptr) {
  SyntheticOptions so;
  so.documents = documents;
  so.seed = seed;
  const auto prep = prepare_corpus(make_synthetic_corpus(so).raw);
  const Vocabulary v = vocab ? *vocab : build_vocabulary(prep, 1);
  return encode_corpus(prep, v, 2, Split::train);
}

}  // namespace

TEST_SUITE("tf-idf") {
  TEST_CASE("hand corpus") {
    // a = 4, b = 5, c = 6; df(a) = 2, df(b) = 2, df(c) = 1, N = 3.
    const std::vector<Document> docs{doc({4, 5, 4}, 0), doc({5}, 1), doc({4, 6, 6}, 0)};
    const TfIdfModel m = fit_tfidf(docs, 7);
    const auto x1 = m.transform(gather_tokens(docs[0]));
    CHECK(feature(x1, 4) == doctest::Approx(2.5753641449035616).epsilon(1e-14));
    CHECK(feature(x1, 5) == doctest::Approx(1.2876820724517808).epsilon(1e-14));
    CHECK(feature(x1, 6) == 0.0);
    const auto x3 = m.transform(gather_tokens(docs[2]));
    CHECK(feature(x3, 6) == doctest::Approx(3.386294361119891).epsilon(1e-14));
  }

  TEST_CASE("a token in every document gets idf 1") {
    const std::vector<Document> docs{doc({4, 5}, 0), doc({4}, 1)};
    CHECK(fit_tfidf(docs, 6).idf(4) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("unseen tokens and padding are dropped") {
    const std::vector<Document> docs{doc({4}, 0)};
    const TfIdfModel m = fit_tfidf(docs, 6);
    const std::vector<TokenId> x{0, 5, 4};
    const auto v = m.transform(x);
    REQUIRE(v.size() == 1);
    CHECK(v[0].first == 4);
  }
}

TEST_SUITE("naive bayes") {
  TEST_CASE("perfectly separated corpus") {
    const std::vector<Document> docs{doc({4, 4}, 0), doc({4}, 0), doc({5}, 1), doc({5, 5, 5}, 1)};
    const TfIdfModel t = fit_tfidf(docs, 6);
    const NaiveBayesModel nb = train_naive_bayes(docs, t, 2);
    for (const auto& d : docs) CHECK(nb.classify(t.transform(gather_tokens(d))) == *d.label);
  }

  TEST_CASE("identical documents follow the priors") {
    const std::vector<Document> docs{doc({4, 5}, 1), doc({4, 5}, 1), doc({4, 5}, 1), doc({4, 5}, 0)};
    const TfIdfModel t = fit_tfidf(docs, 6);
    const NaiveBayesModel nb = train_naive_bayes(docs, t, 2);
    CHECK(nb.classify(t.transform(gather_tokens(docs[3]))) == 1);
    CHECK(nb.classify(SparseVector{}) == 1);
    const auto s = nb.scores(SparseVector{});
    CHECK(s[1] == doctest::Approx(std::log(0.75)));
  }

  TEST_CASE("smoothing flattens the likelihoods") {
    const std::vector<Document> docs{doc({4, 4, 4, 5}, 0), doc({6}, 1), doc({4, 6, 6}, 1)};
    const TfIdfModel t = fit_tfidf(docs, 7);
    double last = 1e300;
    for (double alpha : {1.0, 10.0, 1000.0}) {
      const NaiveBayesModel nb = train_naive_bayes(docs, t, 2, alpha);
      double spread = 0.0;
      for (const auto& theta : nb.log_theta) {
        for (double v : theta) spread = std::max(spread, std::abs(v - std::log(1.0 / 7.0)));
      }
      CHECK(spread < last);
      last = spread;
    }
  }

  TEST_CASE("a class without documents is an error") {
    const std::vector<Document> docs{doc({4}, 0), doc({5}, 0)};
    const TfIdfModel t = fit_tfidf(docs, 6);
    CHECK_THROWS_AS(train_naive_bayes(docs, t, 2), DataError);
    CHECK_THROWS_AS(train_naive_bayes(docs, t, 2, 0.0), ConfigError);
  }

  TEST_CASE("matches a brute-force posterior on a synthetic fixture") {
    const Corpus train = synthetic(50, 3);
    const Corpus test = synthetic(50, 4, &train.vocabulary);
    const TfIdfModel t = fit_tfidf(train.documents, train.vocabulary.size());
    const NaiveBayesModel nb = train_naive_bayes(train.documents, t, 2);
    std::size_t agree = 0, correct = 0, brute_correct = 0;
    for (const auto& d : test.documents) {
      const std::size_t got = nb.classify(t.transform(gather_tokens(d)));
      const std::size_t want = brute_force_class(train.documents, d, train.vocabulary.size());
      agree += got == want;
      correct += got == *d.label;
      brute_correct += want == *d.label;
    }
    CHECK(agree == test.documents.size());
    CHECK(correct == brute_correct);
  }
}

TEST_SUITE("summary evaluation table") {
  TEST_CASE("the identity budget reproduces full-review accuracy") {
    const Corpus train = synthetic(40, 5);
    const Corpus test = synthetic(30, 6, &train.vocabulary);
    ModelConfig c;
    c.vocab_size = train.vocabulary.size();
    c.sentence.layers = {LayerSpec{3, 2, PoolSpec::fixed(2)}};
    c.document.layers = {LayerSpec{2, 2, PoolSpec::fixed(1)}};
    Table3Options o;
    o.budgets = {Budget::fraction(1.0), Budget::fraction(0.2)};
    const Table3 t = run_table3(init_params(c, 1), train, test, o);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].summary_accuracy == t.full_accuracy);
    CHECK(t.rows[0].random_accuracy_mean == t.full_accuracy);
    for (const auto& r : t.rows) {
      CHECK(r.margin() == r.summary_accuracy - r.random_accuracy_mean);
      CHECK(r.random_accuracy.size() == 3);
    }
    REQUIRE(t.first_last_accuracy.has_value());

    const auto j = table3_json(t);
    REQUIRE(j["rows"].size() == 2);
    for (const auto& row : j["rows"]) {
      for (const char* key : {"budget", "summary_acc", "random_acc_mean", "random_seeds", "margin"}) {
        CHECK(row.contains(key));
      }
      CHECK(row["margin"].get<double>() ==
            doctest::Approx(row["summary_acc"].get<double>() - row["random_acc_mean"].get<double>()));
    }
    const std::string text = format_table3(t);
    CHECK(text.find("100%") != std::string::npos);
    CHECK(text.find("20%") != std::string::npos);
  }

  TEST_CASE("default budgets") {
    std::vector<std::string> labels;
    for (const auto& b : default_budgets()) labels.push_back(b.label());
    CHECK(labels == std::vector<std::string>{"50%", "33%", "25%", "20%", "Pick 5", "Pick 4", "Pick 3", "Pick 2"});
  }
}
