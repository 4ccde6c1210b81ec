#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "docconv/errors.hpp"
#include "docconv/saliency.hpp"
#include "support/schema.hpp"

using namespace docconv;

namespace {

const std::filesystem::path fixtures = DOCCONV_FIXTURES;

// d = 1; token 4 embeds to 0.5 and token 5 to -0.5. Width-1 filters with
// k = 1 at both levels, head logits (z, -z).
ModelParams linear_model() {
  ModelConfig c;
  c.embedding_dim = 1;
  c.vocab_size = Vocabulary::kReserved + 2;
  c.sentence.layers = {LayerSpec{1, 1, PoolSpec::fixed(1)}};
  c.document.layers = {LayerSpec{1, 1, PoolSpec::fixed(1)}};
  ModelParams p = init_params(c, 1);
  p.embedding.fill(0.0);
  p.embedding(0, 4) = 0.5;
  p.embedding(0, 5) = -0.5;
  p.sentence_banks[0].weight(0, 0, 0) = 2.0;
  p.sentence_banks[0].bias()[0] = 0.0;
  p.document_banks[0].weight(0, 0, 0) = 1.0;
  p.document_banks[0].bias()[0] = 0.0;
  p.head_weights(0, 0) = 1.0;
  p.head_weights(1, 0) = -1.0;
  p.head_bias = {0.0, 0.0};
  return p;
}

Document make_doc(std::vector<std::vector<TokenId>> sentences) {
  Document d;
  d.source_id = "fixture";
  d.sentences = std::move(sentences);
  return d;
}

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Vocabulary small_vocab() { return Vocabulary::from_tokens({"PAD", "UNKNOWN", "NUMBER", "SYMBOL", "great", "dull"}); }

// Two sentences whose surface text needs escaping.
Document render_fixture() {
  Document d = make_doc({{4, 4}, {5}});
  d.source_id = "review <1>";
  d.sentence_text = {"Great & great!", "Dull."};
  d.tokens = {{"great", "&"}, {"dull"}};
  return d;
}

}  // namespace

TEST_SUITE("pseudo-labels") {
  TEST_CASE("binary case inverts the prediction") {
    CHECK(make_pseudo_label(std::vector<double>{0.9, 0.1}).label == 1);
    CHECK(make_pseudo_label(std::vector<double>{0.1, 0.9}).label == 0);
  }

  TEST_CASE("multi-class picks the least probable class") {
    const auto p = make_pseudo_label(std::vector<double>{0.5, 0.3, 0.2});
    CHECK(p.label == 2);
    CHECK(p.predicted == 0);
  }

  TEST_CASE("fewer than two classes is an error") {
    CHECK_THROWS_AS(make_pseudo_label(std::vector<double>{1.0}), ConfigError);
  }
}

TEST_SUITE("saliency scores") {
  TEST_CASE("constant model gives zero scores") {
    ModelParams p = linear_model();
    for (auto& block : parameter_blocks(p)) {
      for (auto& v : block.values) v = 0.0;
    }
    const auto m = compute_saliency(make_doc({{4, 5}, {5}}), p);
    for (const auto& s : m.words) {
      for (double v : s) CHECK(v == 0.0);
    }
    for (double v : m.sentences) CHECK(v == 0.0);
  }

  TEST_CASE("hand-computed gradient of a linear read-out") {
    const ModelParams p = linear_model();
    const auto m = compute_saliency(make_doc({{4, 5}}), p);
    CHECK(m.pseudo.predicted == 0);
    CHECK(m.pseudo.label == 1);
    // Only the max-pooled word (token 4) reaches the output.
    CHECK(m.words[0][0] == doctest::Approx(0.77332372431979).epsilon(1e-12));
    CHECK(m.words[0][1] == 0.0);
    CHECK(m.sentences[0] == doctest::Approx(0.7011842995460622).epsilon(1e-12));
  }

  TEST_CASE("a repeated token in a position-symmetric model scores equally") {
    // k = 2 keeps both words and the head weighs both pool slots alike.
    ModelConfig c;
    c.embedding_dim = 1;
    c.vocab_size = Vocabulary::kReserved + 2;
    c.sentence.layers = {LayerSpec{1, 1, PoolSpec::fixed(2)}};
    ModelParams p = init_params(c, 1);
    p.embedding.fill(0.0);
    p.embedding(0, 4) = 0.5;
    p.sentence_banks[0].weight(0, 0, 0) = 2.0;
    p.head_weights = Matrix(2, 2, std::vector<double>{1.0, 1.0, -1.0, -1.0});
    const auto m = compute_saliency(make_doc({{4, 4}}), p);
    CHECK(m.words[0][0] > 0.0);
    CHECK(m.words[0][0] == m.words[0][1]);
  }

  TEST_CASE("zero sentence embedding scores zero") {
    const auto m = compute_saliency(make_doc({{4}, {Vocabulary::kPad}}), linear_model());
    CHECK(m.sentences[1] == 0.0);
    CHECK(m.sentences[0] > 0.0);
  }

  TEST_CASE("sentence the document filter ignores scores zero") {
    // k = 1 over sentences keeps only the first one.
    const auto m = compute_saliency(make_doc({{4}, {5}}), linear_model());
    CHECK(m.sentences[0] > 0.0);
    CHECK(m.sentences[1] == 0.0);
    const auto e = compute_saliency(make_doc({{4}, {5}}), linear_model(), SentenceScoreMode::elementwise);
    CHECK(e.sentences[0] == doctest::Approx(m.sentences[0]).epsilon(1e-14));
  }

  TEST_CASE("deterministic") {
    const ModelParams p = init_params(linear_model().config, 3);
    const auto doc = make_doc({{4, 5, 4}, {5, 5}});
    const auto a = compute_saliency(doc, p);
    const auto b = compute_saliency(doc, p);
    CHECK(a.words == b.words);
    CHECK(a.sentences == b.sentences);
  }
}

TEST_SUITE("summaries") {
  TEST_CASE("proportional budget") {
    CHECK(Budget::fraction(0.2).resolve(10) == 2);
    CHECK(Budget::fraction(0.2).resolve(11) == 3);
    CHECK(Budget::fraction(0.2).resolve(1) == 1);
    CHECK(Budget::fraction(0.05).resolve(3) == 1);
    CHECK(Budget::fraction(1.0 / 3.0).resolve(9) == 3);
    CHECK(Budget::pick(3).resolve(2) == 2);
    CHECK(Budget::pick(3).resolve(8) == 3);
    CHECK_THROWS_AS(Budget::fraction(0.0), ConfigError);
    CHECK_THROWS_AS(Budget::fraction(1.5), ConfigError);
    CHECK_THROWS_AS(Budget::pick(0), ConfigError);
  }

  TEST_CASE("budget labels") {
    CHECK(Budget::fraction(0.2).label() == "20%");
    CHECK(Budget::fraction(1.0 / 3.0).label() == "33%");
    CHECK(Budget::pick(3).label() == "Pick 3");
  }

  TEST_CASE("top sentences in document order, lower index on ties") {
    const std::vector<double> scores{0.1, 0.9, 0.5, 0.9, 0.2};
    CHECK(summarize(scores, Budget::pick(2)).selected == std::vector<std::size_t>{1, 3});
    CHECK(summarize(scores, Budget::pick(3)).selected == std::vector<std::size_t>{1, 2, 3});
    const std::vector<double> flat{1, 1, 1, 1};
    CHECK(summarize(flat, Budget::pick(2)).selected == std::vector<std::size_t>{0, 1});
    const std::vector<double> single{0.0};
    CHECK(summarize(single, Budget::fraction(0.5)).selected == std::vector<std::size_t>{0});
  }

  TEST_CASE("random summaries") {
    CHECK(random_summary(10, Budget::pick(3), 4).selected == random_summary(10, Budget::pick(3), 4).selected);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto s = random_summary(5, Budget::pick(2), seed).selected;
      CHECK(s.size() == 2);
      CHECK(s[0] < s[1]);
      CHECK(s[1] < 5);
    }
    std::set<std::vector<std::size_t>> seen;
    for (std::uint64_t seed = 0; seed < 100; ++seed) seen.insert(random_summary(5, Budget::pick(2), seed).selected);
    CHECK(seen.size() == 10);
  }

  TEST_CASE("first and last") {
    CHECK(first_last_summary(1).selected == std::vector<std::size_t>{0});
    CHECK(first_last_summary(5).selected == std::vector<std::size_t>{0, 4});
    CHECK(first_last_summary(0).selected.empty());
  }
}

TEST_SUITE("rendering") {
  TEST_CASE("format names") {
    CHECK(parse_report_format("html") == ReportFormat::html);
    CHECK_THROWS_AS(parse_report_format("pdf"), ConfigError);
  }

  TEST_CASE("html matches the golden file") {
    const Document d = render_fixture();
    const auto m = compute_saliency(d, linear_model());
    const auto s = summarize(m.sentences, Budget::fraction(0.5));
    const std::string html = render_saliency(d, small_vocab(), m, s, ReportFormat::html);
    const auto golden = fixtures / "saliency_two_sentences.html";
    if (std::getenv("DOCCONV_UPDATE_GOLDEN") != nullptr) std::ofstream(golden, std::ios::binary) << html;
    CHECK(html == read(golden));
    CHECK(html.find("&amp;") != std::string::npos);
    CHECK(html.find("review &lt;1&gt;") != std::string::npos);
  }

  TEST_CASE("empty selection renders without highlights") {
    const Document d = render_fixture();
    const auto m = compute_saliency(d, linear_model());
    const std::string html = render_saliency(d, small_vocab(), m, Summary{}, ReportFormat::html);
    CHECK(html.find("sentence selected") == std::string::npos);
    CHECK(html.find("</html>") != std::string::npos);
    const std::string ansi = render_saliency(d, small_vocab(), m, Summary{}, ReportFormat::ansi);
    CHECK(ansi.find("\x1b[1;33m") == std::string::npos);
  }

  TEST_CASE("json validates against the schema fixture") {
    const Document d = render_fixture();
    const auto m = compute_saliency(d, linear_model());
    const auto s = summarize(m.sentences, Budget::pick(1));
    const auto j = nlohmann::json::parse(render_saliency(d, small_vocab(), m, s, ReportFormat::json));
    const auto schema = nlohmann::json::parse(read(fixtures / "saliency.schema.json"));
    CHECK(schema::errors(schema, j).empty());
    CHECK(j["sentences"].size() == 2);
    CHECK(j["words"].size() == 3);
    CHECK(j["sentences"][0]["selected"] == true);
    CHECK(j["words"][1]["token"] == "&");
  }

  TEST_CASE("misaligned maps are rejected") {
    const Document d = render_fixture();
    auto m = compute_saliency(d, linear_model());
    m.words[1].push_back(0.0);
    CHECK_THROWS_AS(render_saliency(d, small_vocab(), m, Summary{}, ReportFormat::json), ConfigError);
  }
}
