#include "docconv/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "docconv/binary_io.hpp"
#include "docconv/errors.hpp"
#include "docconv/gradcheck.hpp"
#include "docconv/log.hpp"
#include "docconv/model_io.hpp"
#include "docconv/nb_eval.hpp"
#include "docconv/random.hpp"
#include "docconv/saliency.hpp"
#include "docconv/synthetic.hpp"
#include "docconv/train.hpp"

namespace fs = std::filesystem;

namespace docconv {

namespace {

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"preprocess", "train",    "eval",   "summarize",
                                                 "saliency",   "gradcheck", "nb-eval"};
  return names;
}

// Restores the previous log sink on scope exit.
class SinkGuard {
 public:
  explicit SinkGuard(std::ostream& err)
      : previous_(set_log_sink([&err](LogLevel level, std::string_view message) {
          const char* tag = level == LogLevel::info ? "info" : level == LogLevel::warning ? "warn" : "error";
          err << "[" << tag << "] " << message << "\n";
          err.flush();
        })) {}
  ~SinkGuard() { set_log_sink(std::move(previous_)); }
  SinkGuard(const SinkGuard&) = delete;
  SinkGuard& operator=(const SinkGuard&) = delete;

 private:
  LogSink previous_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig resolve_config(const std::string& config_path, const std::string& preset_name) {
  if (!config_path.empty() && !preset_name.empty()) throw ConfigError("give either --config or --preset, not both");
  if (!preset_name.empty()) return preset(preset_name);
  if (config_path.empty()) throw ConfigError("a --config file or --preset name is required");
  return load_config(config_path);
}

Corpus encode_raw(const RawCorpus& raw, const Vocabulary& vocab, std::size_t classes) {
  return encode_corpus(prepare_corpus(raw), vocab, classes, raw.split);
}

// Training corpus plus optional test corpus, encoded with `vocab` when given
// and with a freshly built vocabulary otherwise.
std::pair<Corpus, std::optional<Corpus>> encoded_dataset(const RunConfig& config, const Vocabulary* vocab) {
  LoadedData data = load_dataset(config.dataset);
  if (data.encoded_train) {
    if (vocab != nullptr && !(data.encoded_train->vocabulary == *vocab)) {
      throw ConfigError("encoded corpus " + config.dataset.path + " uses a different vocabulary than the model");
    }
    return {std::move(*data.encoded_train), std::move(data.encoded_test)};
  }
  const auto prepared = prepare_corpus(data.train);
  const Vocabulary v = vocab != nullptr ? *vocab : build_vocabulary(prepared, config.min_count);
  Corpus train = encode_corpus(prepared, v, config.dataset.classes, Split::train);
  std::optional<Corpus> test;
  if (data.test) test = encode_raw(*data.test, v, config.dataset.classes);
  return {std::move(train), std::move(test)};
}

fs::path make_run_directory(const RunConfig& config, const std::string& command, const std::string& run_name) {
  const std::string name = run_name.empty() ? command + "-" + config_hash(config).substr(0, 8) : run_name;
  const fs::path dir = output_root(config) / name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create run directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_provenance(const fs::path& dir, const RunConfig& config) {
  write_text(dir / "config.cfg", serialize_config(config));
  write_text(dir / "seed.txt", "init = " + std::to_string(config.init_seed) + "\ntrain = " +
                                   std::to_string(config.train.seed) + "\n");
}

void write_metrics(const fs::path& dir, const RunConfig& config, const nlohmann::json& metrics) {
  nlohmann::json j;
  j["run_id"] = dir.filename().string();
  j["config_hash"] = config_hash(config);
  j["metrics"] = metrics;
  write_text(dir / "metrics.json", j.dump(2) + "\n");
}

Budget parse_budget(const std::string& text) {
  if (text.rfind("pick:", 0) == 0) {
    const std::string n = text.substr(5);
    if (n.empty() || n.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("budget '" + text + "': expected pick:N");
    }
    return Budget::pick(std::stoul(n));
  }
  std::size_t used = 0;
  double p = 0.0;
  try {
    p = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw ConfigError("budget '" + text + "': expected a proportion in (0, 1] or pick:N");
  }
  return Budget::fraction(p);
}

SentenceScoreMode parse_score_mode(const std::string& name) {
  if (name == "inner") return SentenceScoreMode::inner_product;
  if (name == "elementwise") return SentenceScoreMode::elementwise;
  throw ConfigError("sentence score '" + name + "': expected inner or elementwise");
}

nlohmann::json evaluation_json(const Evaluation& e) {
  return {{"accuracy", e.accuracy}, {"correct", e.correct}, {"total", e.total}, {"confusion", e.confusion}};
}

// ---------------------------------------------------------------------------

struct Common {
  std::string config;
  std::string preset;
};

int cmd_preprocess(const Common& c, const std::string& run_name, std::ostream& out) {
  const RunConfig config = resolve_config(c.config, c.preset);
  auto [train, test] = encoded_dataset(config, nullptr);
  const fs::path dir = make_run_directory(config, "preprocess", run_name);
  RunLock lock(dir);
  write_provenance(dir, config);
  save_corpus(train, dir / "train.corpus");
  nlohmann::json metrics = {{"train_documents", train.documents.size()},
                            {"vocabulary_size", train.vocabulary.size()},
                            {"label_counts", train.label_counts()}};
  if (test) {
    save_corpus(*test, dir / "test.corpus");
    metrics["test_documents"] = test->documents.size();
  }
  write_metrics(dir, config, metrics);
  out << dir.string() << "\n";
  return kExitOk;
}

int cmd_train(const Common& c, const std::string& run_name, std::ostream& out, std::ostream& err) {
  RunConfig config = resolve_config(c.config, c.preset);
  auto [train_corpus, test] = encoded_dataset(config, nullptr);
  config.model.vocab_size = train_corpus.vocabulary.size();
  config.model.classes = config.dataset.classes;

  const fs::path dir = make_run_directory(config, "train", run_name);
  RunLock lock(dir);
  write_provenance(dir, config);

  const auto start = std::chrono::steady_clock::now();
  auto heartbeat = [&](const EpochStats& e) {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char line[256];
    std::snprintf(line, sizeof line,
                  "heartbeat epoch=%zu loss=%.6f train_accuracy=%.4f validation_accuracy=%.4f elapsed_s=%.1f\n",
                  e.epoch, e.train_loss, e.train_accuracy, e.validation_accuracy, elapsed);
    err << line;
    err.flush();
  };
  TrainResult result = train(train_corpus, init_params(config.model, config.init_seed), config.train, heartbeat);

  const fs::path model_path = dir / "model.bin";
  save_model(result.params, train_corpus.vocabulary, model_path);
  const std::string model_hash = hex64(file_hash(model_path));
  write_text(dir / "model.hash", model_hash + "\n");

  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : result.history) {
    history.push_back({{"epoch", h.epoch},
                       {"train_loss", h.train_loss},
                       {"train_accuracy", h.train_accuracy},
                       {"validation_accuracy", h.validation_accuracy}});
  }
  nlohmann::json metrics = {{"best_epoch", result.best_epoch},
                            {"train_size", result.train_size},
                            {"validation_size", result.validation_size},
                            {"vocabulary_size", train_corpus.vocabulary.size()},
                            {"model_hash", model_hash},
                            {"history", history}};
  if (!result.history.empty() && result.best_epoch > 0) {
    const auto& best = result.history[result.best_epoch - 1];
    metrics["train_accuracy"] = best.train_accuracy;
    metrics["validation_accuracy"] = best.validation_accuracy;
  }
  if (test) {
    const Evaluation e = evaluate(*test, result.params);
    metrics["test"] = evaluation_json(e);
    log_info("test accuracy " + std::to_string(e.accuracy));
  }
  write_metrics(dir, config, metrics);
  out << dir.string() << "\n";
  return kExitOk;
}

int cmd_eval(const Common& c, const std::string& model_path, std::ostream& out) {
  const RunConfig config = resolve_config(c.config, c.preset);
  const SavedModel model = load_model(model_path);
  auto [train_corpus, test] = encoded_dataset(config, &model.vocabulary);
  const Corpus& target = test ? *test : train_corpus;
  if (!test) log_warning("no test split configured; evaluating on the training data");
  nlohmann::json j = evaluation_json(evaluate(target, model.params));
  j["split"] = std::string(split_name(target.split));
  out << j.dump(2) << "\n";
  return kExitOk;
}

struct DocumentInputs {
  std::string model;
  std::string input;
  std::string budget;
  std::string format = "ansi";
  std::string output;
  std::string score = "inner";
  bool no_sentence_split = false;
};

int cmd_render(const DocumentInputs& in, bool summary_required, std::ostream& out) {
  const ReportFormat format = parse_report_format(in.format);
  const SentenceScoreMode mode = parse_score_mode(in.score);
  std::optional<Budget> budget;
  if (!in.budget.empty()) budget = parse_budget(in.budget);
  if (summary_required && !budget) budget = Budget::fraction(0.2);
  const SavedModel model = load_model(in.model);
  const Document doc = encode_document(read_text(in.input), std::nullopt, model.vocabulary,
                                       fs::path(in.input).filename().string(), !in.no_sentence_split);
  const SaliencyMap map = compute_saliency(doc, model.params, mode);
  Summary summary;
  if (budget) summary = summarize(map.sentences, *budget);
  const std::string text = render_saliency(doc, model.vocabulary, map, summary, format);
  if (in.output.empty()) {
    out << text;
  } else {
    write_text(in.output, text);
    out << in.output << "\n";
  }
  return kExitOk;
}

// Random documents over a small vocabulary, checked against every parameter
// block of a model built from the config's architecture.
int cmd_gradcheck(const Common& c, std::size_t samples, double eps, double tolerance, std::ostream& out) {
  RunConfig config = resolve_config(c.config, c.preset);
  config.model.vocab_size = Vocabulary::kReserved + 8;
  config.model.classes = config.dataset.classes;
  ModelParams params = init_params(config.model, config.init_seed);
  Rng rng(config.init_seed ^ 0x6772616463686b31ULL);

  double worst = 0.0;
  std::string worst_block;
  for (std::size_t s = 0; s < samples; ++s) {
    Document doc;
    doc.source_id = "gradcheck-" + std::to_string(s);
    const std::size_t sentences = 1 + rng.below(3);
    for (std::size_t i = 0; i < sentences; ++i) {
      std::vector<TokenId> ids(1 + rng.below(5));
      for (auto& id : ids) id = static_cast<TokenId>(1 + rng.below(config.model.vocab_size - 1));
      doc.sentences.push_back(std::move(ids));
    }
    const std::size_t label = rng.below(config.model.classes);
    const BackwardResult grads = backward(forward(doc, params), label, params);
    const auto analytic = gradient_blocks(grads.params, params);
    auto blocks = parameter_blocks(params);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto r = grad_check([&] { return document_loss(doc, label, params); }, blocks[b].values, analytic[b], eps);
      if (r.max_rel_error > worst || worst_block.empty()) {
        worst = std::max(worst, r.max_rel_error);
        worst_block = blocks[b].name;
      }
    }
  }
  char line[160];
  std::snprintf(line, sizeof line, "max_rel_error=%.3e worst_block=%s samples=%zu eps=%g\n", worst,
                worst_block.c_str(), samples, eps);
  out << line;
  return worst < tolerance ? kExitOk : kExitInternal;
}

int cmd_nb_eval(const Common& c, const std::string& model_path, const std::vector<std::uint64_t>& seeds,
                const std::string& score, const std::string& json_path, std::ostream& out) {
  const RunConfig config = resolve_config(c.config, c.preset);
  const SavedModel model = load_model(model_path);
  auto [train_corpus, test] = encoded_dataset(config, &model.vocabulary);
  if (!test) throw ConfigError("nb-eval needs a test split (dataset.test_path, or an imdb/synthetic dataset)");
  Table3Options options;
  options.seeds = seeds;
  options.mode = parse_score_mode(score);
  const Table3 table = run_table3(model.params, train_corpus, *test, options);
  out << format_table3(table);
  if (!json_path.empty()) write_text(json_path, table3_json(table).dump(2) + "\n");
  return kExitOk;
}

}  // namespace

std::string usage() {
  return "usage: docconv <command> [options]\n"
         "\n"
         "commands:\n"
         "  preprocess  encode a dataset and cache the corpus files\n"
         "  train       train a model and write a run directory\n"
         "  eval        accuracy of a model on the configured test split\n"
         "  summarize   extractive summary of one document\n"
         "  saliency    word and sentence saliency of one document\n"
         "  gradcheck   finite-difference check of the configured architecture\n"
         "  nb-eval     Naive Bayes evaluation of summaries against random baselines\n"
         "\n"
         "run 'docconv <command> --help' for the options of a command\n";
}

LoadedData load_dataset(const DatasetConfig& dataset) {
  LoadedData data;
  auto require = [](const std::string& path) {
    if (!fs::exists(path)) throw DataError("dataset path does not exist: " + path);
  };
  switch (dataset.kind) {
    case DatasetKind::synthetic: {
      SyntheticOptions options = dataset.synthetic;
      data.train = make_synthetic_corpus(options).raw;
      options.seed += 1;
      data.test = make_synthetic_corpus(options).raw;
      data.test->split = Split::test;
      break;
    }
    case DatasetKind::imdb:
      require(dataset.path);
      data.train = load_imdb(dataset.path, Split::train);
      if (fs::exists(fs::path(dataset.path) / "test")) data.test = load_imdb(dataset.path, Split::test);
      break;
    case DatasetKind::csv: {
      require(dataset.path);
      CsvOptions options;
      options.delimiter = dataset.delimiter;
      options.text_column = dataset.text_column;
      options.label_column = dataset.label_column;
      options.has_header = dataset.has_header;
      options.sentence_split = dataset.sentence_split;
      if (!dataset.label_map.empty()) options.label_map = parse_label_map(dataset.label_map);
      data.train = load_labelled_csv(dataset.path, options, Split::train);
      if (!dataset.test_path.empty()) {
        require(dataset.test_path);
        data.test = load_labelled_csv(dataset.test_path, options, Split::test);
      }
      break;
    }
    case DatasetKind::corpus:
      require(dataset.path);
      data.encoded_train = load_corpus(dataset.path);
      if (!dataset.test_path.empty()) {
        require(dataset.test_path);
        data.encoded_test = load_corpus(dataset.test_path);
        if (!(data.encoded_test->vocabulary == data.encoded_train->vocabulary)) {
          throw DataError("corpus files " + dataset.path + " and " + dataset.test_path +
                          " use different vocabularies");
        }
      }
      break;
  }
  if (!data.encoded_train) data.train.class_count = dataset.classes;
  if (data.test) data.test->class_count = dataset.classes;
  return data;
}

fs::path output_root(const RunConfig& config) {
  if (const char* env = std::getenv("DOCCONV_OUTPUT_ROOT"); env != nullptr && *env != '\0') return env;
  return config.output_directory;
}

RunLock::RunLock(const fs::path& directory) : path_(directory / ".lock") {
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr) {
    throw ConfigError("run directory " + directory.string() + " is locked by another run (remove " +
                      path_.string() + " if that run is gone)");
  }
  std::fclose(f);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    (args.empty() ? err : out) << usage();
    return args.empty() ? kExitUser : kExitOk;
  }
  const std::string& command = args[0];
  if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
    err << "unknown command '" << command << "'\n\n" << usage();
    return kExitUser;
  }
  SinkGuard sink(err);

  CLI::App app{"docconv " + command, "docconv " + command};
  Common common;
  std::string run_name, model, json_path, score = "inner";
  DocumentInputs doc;
  std::size_t samples = 5;
  double eps = 1e-5, tolerance = 1e-4;
  std::vector<std::uint64_t> seeds = {1, 2, 3};

  const bool uses_config = command != "summarize" && command != "saliency";
  if (uses_config) {
    app.add_option("--config", common.config, "config file");
    app.add_option("--preset", common.preset, "named preset: imdb-hierarchical or twitter-dcnn-like");
  }
  if (command == "preprocess" || command == "train") {
    app.add_option("--run-name", run_name, "run directory name under the output root");
  }
  if (command == "eval" || command == "nb-eval") app.add_option("--model", model, "model file")->required();
  if (command == "summarize" || command == "saliency") {
    app.add_option("--model", doc.model, "model file")->required();
    app.add_option("--input", doc.input, "plain-text document")->required();
    app.add_option("--budget", doc.budget, "proportion in (0, 1] or pick:N");
    app.add_option("--format", doc.format, "ansi, html or json");
    app.add_option("--output", doc.output, "write the report here instead of stdout");
    app.add_option("--sentence-score", doc.score, "inner or elementwise");
    app.add_flag("--no-sentence-split", doc.no_sentence_split, "treat the input as one sentence");
  }
  if (command == "gradcheck") {
    app.add_option("--samples", samples, "random documents to check");
    app.add_option("--eps", eps, "finite-difference step");
    app.add_option("--tolerance", tolerance, "maximum accepted relative error");
  }
  if (command == "nb-eval") {
    app.add_option("--seeds", seeds, "random-summary seeds")->delimiter(',');
    app.add_option("--sentence-score", score, "inner or elementwise");
    app.add_option("--json", json_path, "also write the table as JSON");
  }

  std::vector<const char*> argv;
  argv.push_back("docconv");
  for (std::size_t i = 1; i < args.size(); ++i) argv.push_back(args[i].c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUser;
  }

  try {
    if (command == "preprocess") return cmd_preprocess(common, run_name, out);
    if (command == "train") return cmd_train(common, run_name, out, err);
    if (command == "eval") return cmd_eval(common, model, out);
    if (command == "summarize") return cmd_render(doc, true, out);
    if (command == "saliency") return cmd_render(doc, false, out);
    if (command == "gradcheck") return cmd_gradcheck(common, samples, eps, tolerance, out);
    if (command == "nb-eval") return cmd_nb_eval(common, model, seeds, score, json_path, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace docconv
