#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "docconv/cli.hpp"
#include "docconv/config.hpp"
#include "docconv/errors.hpp"

using namespace docconv;
namespace fs = std::filesystem;

namespace {

const fs::path configs = DOCCONV_CONFIGS;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// A scratch output root for one test, exported through the environment.
struct ScratchRoot {
  fs::path path;
  explicit ScratchRoot(const std::string& name) : path(fs::temp_directory_path() / ("docconv_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
    setenv("DOCCONV_OUTPUT_ROOT", path.c_str(), 1);
  }
  ~ScratchRoot() {
    unsetenv("DOCCONV_OUTPUT_ROOT");
    fs::remove_all(path);
  }
};

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("layer strings round trip") {
    const LevelConfig l = parse_level("6x7:dynamic:4:0.5, 14x5:fixed:4");
    REQUIRE(l.layers.size() == 2);
    CHECK(l.layers[0].maps == 6);
    CHECK(l.layers[0].width == 7);
    CHECK(l.layers[0].pool == PoolSpec::dynamic(4, 0.5));
    CHECK(l.layers[1].pool == PoolSpec::fixed(4));
    CHECK(format_level(l) == "6x7:dynamic:4:0.5, 14x5:fixed:4");
    CHECK(parse_level("").layers.empty());
    CHECK_THROWS_AS(parse_level("6x5:avg:2"), ConfigError);
    CHECK_THROWS_AS(parse_level("65:fixed:2"), ConfigError);
  }

  TEST_CASE("unknown keys and sections are rejected") {
    CHECK_THROWS_AS(parse_config("[model]\nembeding_dim = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[modle]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[model]\nembedding_dim = 4\nembedding_dim = 5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("embedding_dim = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[train]\nlearning_rate = fast\n"), ConfigError);
    try {
      parse_config("[train]\nepochs = 3\nbogus = 1\n");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
      CHECK(std::string(e.what()).find("train.bogus") != std::string::npos);
    }
  }

  TEST_CASE("invalid values fail validation before any work") {
    CHECK_THROWS_AS(parse_config("[train]\ndropout = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[model]\nsentence = 6x5:dynamic:4:0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[dataset]\nkind = csv\n"), ConfigError);
  }

  TEST_CASE("presets encode the published hyperparameters") {
    const RunConfig imdb = preset("imdb-hierarchical");
    CHECK(imdb.model.embedding_dim == 10);
    CHECK(imdb.model.sentence.layers == std::vector<LayerSpec>{LayerSpec{5, 6, PoolSpec::fixed(4)}});
    CHECK(imdb.model.document.layers == std::vector<LayerSpec>{LayerSpec{5, 15, PoolSpec::fixed(2)}});
    CHECK(imdb.model.document_embedding_dim() == 30);

    const RunConfig tw = preset("twitter-dcnn-like");
    CHECK(tw.model.embedding_dim == 60);
    REQUIRE(tw.model.sentence.layers.size() == 2);
    CHECK(tw.model.sentence.layers[0].maps == 6);
    CHECK(tw.model.sentence.layers[0].width == 7);
    CHECK(tw.model.sentence.layers[1].maps == 14);
    CHECK(tw.model.sentence.layers[1].width == 5);
    CHECK(tw.model.document.layers.empty());
    CHECK_THROWS_AS(preset("resnet"), ConfigError);
  }

  TEST_CASE("serialization round trips") {
    for (const auto& [name, config] : preset_configs()) {
      const std::string text = serialize_config(config);
      CHECK(serialize_config(parse_config(text)) == text);
      CHECK(config_hash(parse_config(text)) == config_hash(config));
    }
    for (const char* file : {"toy.cfg", "synthetic.cfg", "imdb.cfg", "twitter.cfg"}) {
      const RunConfig c = load_config(configs / file);
      CHECK(serialize_config(parse_config(serialize_config(c))) == serialize_config(c));
    }
  }

  TEST_CASE("shipped preset files equal the built-in presets") {
    CHECK(serialize_config(load_config(configs / "imdb.cfg")) == serialize_config(preset("imdb-hierarchical")));
    CHECK(serialize_config(load_config(configs / "twitter.cfg")) == serialize_config(preset("twitter-dcnn-like")));
  }

  TEST_CASE("hash changes with any setting") {
    RunConfig a = preset("imdb-hierarchical");
    RunConfig b = a;
    b.train.seed += 1;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 16);
  }
}

TEST_SUITE("command line") {
  TEST_CASE("unknown command prints usage") {
    const auto r = invoke({"frobnicate"});
    CHECK(r.code == kExitUser);
    CHECK(r.err.find("usage:") != std::string::npos);
    CHECK(invoke({}).code == kExitUser);
    CHECK(invoke({"--help"}).code == kExitOk);
  }

  TEST_CASE("bad flags are user errors") {
    CHECK(invoke({"train", "--no-such-flag"}).code == kExitUser);
    CHECK(invoke({"train"}).code == kExitUser);
    CHECK(invoke({"summarize", "--model", "x.bin"}).code == kExitUser);
  }

  TEST_CASE("gradcheck on the toy config") {
    const auto r = invoke({"gradcheck", "--config", (configs / "toy.cfg").string()});
    CHECK(r.code == kExitOk);
    REQUIRE(r.out.find("max_rel_error=") != std::string::npos);
    const double err = std::stod(r.out.substr(r.out.find('=') + 1));
    CHECK(err < 1e-4);
  }

  TEST_CASE("missing dataset path is named") {
    ScratchRoot root("missing");
    const fs::path cfg = root.path / "bad.cfg";
    std::ofstream(cfg) << "[dataset]\nkind = csv\npath = /nonexistent/reviews.csv\n"
                        "[model]\nsentence = 2x2:fixed:2\n";
    const auto r = invoke({"train", "--config", cfg.string()});
    CHECK(r.code == kExitUser);
    CHECK(r.err.find("/nonexistent/reviews.csv") != std::string::npos);
  }

  TEST_CASE("train writes a reproducible run directory") {
    ScratchRoot root("train");
    const auto a = invoke({"train", "--config", (configs / "toy.cfg").string(), "--run-name", "a"});
    REQUIRE(a.code == kExitOk);
    const auto b = invoke({"train", "--config", (configs / "toy.cfg").string(), "--run-name", "b"});
    REQUIRE(b.code == kExitOk);
    for (const char* name : {"config.cfg", "seed.txt", "model.bin", "model.hash", "metrics.json"}) {
      CHECK(fs::exists(root.path / "a" / name));
    }
    CHECK_FALSE(fs::exists(root.path / "a" / ".lock"));
    CHECK(read(root.path / "a" / "model.bin") == read(root.path / "b" / "model.bin"));
    CHECK(a.err.find("heartbeat epoch=1 loss=") != std::string::npos);

    const auto metrics = nlohmann::json::parse(read(root.path / "a" / "metrics.json"));
    CHECK(metrics["run_id"] == "a");
    CHECK(metrics["config_hash"] == config_hash(load_config(configs / "toy.cfg")));
    CHECK(metrics["metrics"].contains("train_accuracy"));
    CHECK(metrics["metrics"]["model_hash"].get<std::string>() + "\n" == read(root.path / "a" / "model.hash"));

    // The stored config reproduces the run.
    const auto c = invoke({"train", "--config", (root.path / "a" / "config.cfg").string(), "--run-name", "c"});
    REQUIRE(c.code == kExitOk);
    CHECK(read(root.path / "c" / "model.bin") == read(root.path / "a" / "model.bin"));
  }

  TEST_CASE("a locked run directory is refused") {
    ScratchRoot root("lock");
    fs::create_directories(root.path / "busy");
    std::ofstream(root.path / "busy" / ".lock") << "";
    const auto r = invoke({"train", "--config", (configs / "toy.cfg").string(), "--run-name", "busy"});
    CHECK(r.code == kExitUser);
    CHECK(r.err.find("locked") != std::string::npos);
  }

  TEST_CASE("summarize, saliency, eval and nb-eval on a trained model") {
    ScratchRoot root("summarize");
    REQUIRE(invoke({"train", "--config", (configs / "toy.cfg").string(), "--run-name", "m"}).code == kExitOk);
    const std::string model = (root.path / "m" / "model.bin").string();
    const fs::path review = root.path / "review.txt";
    std::ofstream(review) << "The film was long. An excellent cast. The city at night. A new year. "
                             "Some old house. It was awful. The music. The first hour. A friend. The end.";
    const fs::path html = root.path / "summary.html";
    const auto s = invoke({"summarize", "--model", model, "--input", review.string(), "--budget", "0.2", "--format",
                           "html", "--output", html.string()});
    REQUIRE(s.code == kExitOk);
    const std::string page = read(html);
    std::size_t highlighted = 0;
    for (auto pos = page.find("sentence selected"); pos != std::string::npos;
         pos = page.find("sentence selected", pos + 1)) {
      ++highlighted;
    }
    CHECK(highlighted == 2);  // ceil(0.2 * 10)

    const auto j = invoke({"saliency", "--model", model, "--input", review.string(), "--format", "json"});
    REQUIRE(j.code == kExitOk);
    CHECK(nlohmann::json::parse(j.out)["sentences"].size() == 10);

    CHECK(invoke({"summarize", "--model", model, "--input", review.string(), "--budget", "two"}).code == kExitUser);
    CHECK(invoke({"summarize", "--model", model, "--input", review.string(), "--format", "pdf"}).code == kExitUser);

    const auto e = invoke({"eval", "--model", model, "--config", (configs / "toy.cfg").string()});
    REQUIRE(e.code == kExitOk);
    CHECK(nlohmann::json::parse(e.out)["total"] == 32);

    const fs::path table = root.path / "table.json";
    const auto n = invoke({"nb-eval", "--model", model, "--config", (configs / "toy.cfg").string(), "--seeds", "1,2",
                           "--json", table.string()});
    REQUIRE(n.code == kExitOk);
    CHECK(n.out.find("Pick 2") != std::string::npos);
    CHECK(nlohmann::json::parse(read(table))["rows"][0]["random_seeds"].size() == 2);
  }

  TEST_CASE("preprocess caches a corpus that train accepts") {
    ScratchRoot root("preprocess");
    const auto p = invoke({"preprocess", "--config", (configs / "toy.cfg").string(), "--run-name", "cache"});
    REQUIRE(p.code == kExitOk);
    CHECK(fs::exists(root.path / "cache" / "train.corpus"));
    CHECK(fs::exists(root.path / "cache" / "test.corpus"));
    const fs::path cfg = root.path / "cached.cfg";
    std::ofstream(cfg) << "[dataset]\nkind = corpus\npath = " << (root.path / "cache" / "train.corpus").string()
                       << "\ntest_path = " << (root.path / "cache" / "test.corpus").string()
                       << "\n[model]\nembedding_dim = 3\nsentence = 2x2:fixed:2\ndocument = 2x2:fixed:1\n"
                          "[train]\nepochs = 2\n";
    CHECK(invoke({"train", "--config", cfg.string(), "--run-name", "from-cache"}).code == kExitOk);
  }
}
