#include "docconv/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "docconv/binary_io.hpp"
#include "docconv/errors.hpp"

namespace docconv {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::size_t to_size(std::string_view v, std::string_view what) {
  std::size_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(std::string(what) + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double to_double(std::string_view v, std::string_view what) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw ConfigError(std::string(what) + ": expected a number, got '" + std::string(v) + "'");
  }
  return out;
}

bool to_bool(std::string_view v, std::string_view what) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(std::string(what) + ": expected true or false, got '" + std::string(v) + "'");
}

std::string boolean(bool b) { return b ? "true" : "false"; }

DatasetKind parse_kind(std::string_view v) {
  for (auto k : {DatasetKind::imdb, DatasetKind::csv, DatasetKind::corpus, DatasetKind::synthetic}) {
    if (dataset_kind_name(k) == v) return k;
  }
  throw ConfigError("dataset.kind: expected imdb, csv, corpus or synthetic, got '" + std::string(v) + "'");
}

std::string format_delimiter(char c) { return c == '\t' ? "tab" : std::string(1, c); }

char parse_delimiter(std::string_view v) {
  if (v == "tab") return '\t';
  if (v.size() != 1) throw ConfigError("dataset.delimiter: expected one character or 'tab'");
  return v[0];
}

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  std::string section;
  std::string name;
  Getter get;
  Setter set;
};

// The single source of truth for both parsing and serialization.
const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto add = [&](std::string section, std::string name, Getter g, Setter s) {
      k.push_back({std::move(section), std::move(name), std::move(g), std::move(s)});
    };
    add("dataset", "kind", [](const RunConfig& c) { return std::string(dataset_kind_name(c.dataset.kind)); },
        [](RunConfig& c, const std::string& v) { c.dataset.kind = parse_kind(v); });
    add("dataset", "path", [](const RunConfig& c) { return c.dataset.path; },
        [](RunConfig& c, const std::string& v) { c.dataset.path = v; });
    add("dataset", "test_path", [](const RunConfig& c) { return c.dataset.test_path; },
        [](RunConfig& c, const std::string& v) { c.dataset.test_path = v; });
    add("dataset", "text_column", [](const RunConfig& c) { return c.dataset.text_column; },
        [](RunConfig& c, const std::string& v) { c.dataset.text_column = v; });
    add("dataset", "label_column", [](const RunConfig& c) { return c.dataset.label_column; },
        [](RunConfig& c, const std::string& v) { c.dataset.label_column = v; });
    add("dataset", "delimiter", [](const RunConfig& c) { return format_delimiter(c.dataset.delimiter); },
        [](RunConfig& c, const std::string& v) { c.dataset.delimiter = parse_delimiter(v); });
    add("dataset", "has_header", [](const RunConfig& c) { return boolean(c.dataset.has_header); },
        [](RunConfig& c, const std::string& v) { c.dataset.has_header = to_bool(v, "dataset.has_header"); });
    add("dataset", "label_map", [](const RunConfig& c) { return c.dataset.label_map; },
        [](RunConfig& c, const std::string& v) { c.dataset.label_map = v; });
    add("dataset", "sentence_split", [](const RunConfig& c) { return boolean(c.dataset.sentence_split); },
        [](RunConfig& c, const std::string& v) { c.dataset.sentence_split = to_bool(v, "dataset.sentence_split"); });
    add("dataset", "classes", [](const RunConfig& c) { return std::to_string(c.dataset.classes); },
        [](RunConfig& c, const std::string& v) { c.dataset.classes = to_size(v, "dataset.classes"); });

    auto syn = [&](const char* name, std::size_t SyntheticOptions::*field) {
      add("synthetic", name, [field](const RunConfig& c) { return std::to_string(c.dataset.synthetic.*field); },
          [field, name](RunConfig& c, const std::string& v) {
            c.dataset.synthetic.*field = to_size(v, std::string("synthetic.") + name);
          });
    };
    syn("documents", &SyntheticOptions::documents);
    syn("min_sentences", &SyntheticOptions::min_sentences);
    syn("max_sentences", &SyntheticOptions::max_sentences);
    syn("min_planted", &SyntheticOptions::min_planted);
    syn("max_planted", &SyntheticOptions::max_planted);
    syn("min_words", &SyntheticOptions::min_words);
    syn("max_words", &SyntheticOptions::max_words);
    add("synthetic", "seed", [](const RunConfig& c) { return std::to_string(c.dataset.synthetic.seed); },
        [](RunConfig& c, const std::string& v) { c.dataset.synthetic.seed = to_size(v, "synthetic.seed"); });

    add("preprocess", "min_count", [](const RunConfig& c) { return std::to_string(c.min_count); },
        [](RunConfig& c, const std::string& v) { c.min_count = to_size(v, "preprocess.min_count"); });

    add("model", "embedding_dim", [](const RunConfig& c) { return std::to_string(c.model.embedding_dim); },
        [](RunConfig& c, const std::string& v) { c.model.embedding_dim = to_size(v, "model.embedding_dim"); });
    add("model", "sentence", [](const RunConfig& c) { return format_level(c.model.sentence); },
        [](RunConfig& c, const std::string& v) { c.model.sentence = parse_level(v); });
    add("model", "document", [](const RunConfig& c) { return format_level(c.model.document); },
        [](RunConfig& c, const std::string& v) { c.model.document = parse_level(v); });

    add("train", "learning_rate", [](const RunConfig& c) { return number(c.train.learning_rate); },
        [](RunConfig& c, const std::string& v) { c.train.learning_rate = to_double(v, "train.learning_rate"); });
    add("train", "l2", [](const RunConfig& c) { return number(c.train.l2); },
        [](RunConfig& c, const std::string& v) { c.train.l2 = to_double(v, "train.l2"); });
    add("train", "dropout", [](const RunConfig& c) { return number(c.train.dropout); },
        [](RunConfig& c, const std::string& v) { c.train.dropout = to_double(v, "train.dropout"); });
    add("train", "batch_size", [](const RunConfig& c) { return std::to_string(c.train.batch_size); },
        [](RunConfig& c, const std::string& v) { c.train.batch_size = to_size(v, "train.batch_size"); });
    add("train", "epochs", [](const RunConfig& c) { return std::to_string(c.train.epochs); },
        [](RunConfig& c, const std::string& v) { c.train.epochs = to_size(v, "train.epochs"); });
    add("train", "validation_fraction", [](const RunConfig& c) { return number(c.train.validation_fraction); },
        [](RunConfig& c, const std::string& v) {
          c.train.validation_fraction = to_double(v, "train.validation_fraction");
        });
    add("train", "threads", [](const RunConfig& c) { return std::to_string(c.train.threads); },
        [](RunConfig& c, const std::string& v) { c.train.threads = to_size(v, "train.threads"); });
    add("train", "train_biases", [](const RunConfig& c) { return boolean(c.train.train_biases); },
        [](RunConfig& c, const std::string& v) { c.train.train_biases = to_bool(v, "train.train_biases"); });
    add("train", "stop_at_validation",
        [](const RunConfig& c) {
          return c.train.stop_at_validation_accuracy ? number(*c.train.stop_at_validation_accuracy) : std::string();
        },
        [](RunConfig& c, const std::string& v) {
          if (v.empty()) {
            c.train.stop_at_validation_accuracy.reset();
          } else {
            c.train.stop_at_validation_accuracy = to_double(v, "train.stop_at_validation");
          }
        });

    add("seeds", "init", [](const RunConfig& c) { return std::to_string(c.init_seed); },
        [](RunConfig& c, const std::string& v) { c.init_seed = to_size(v, "seeds.init"); });
    add("seeds", "train", [](const RunConfig& c) { return std::to_string(c.train.seed); },
        [](RunConfig& c, const std::string& v) { c.train.seed = to_size(v, "seeds.train"); });

    add("output", "directory", [](const RunConfig& c) { return c.output_directory; },
        [](RunConfig& c, const std::string& v) { c.output_directory = v; });
    return k;
  }();
  return table;
}

}  // namespace

std::string_view dataset_kind_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::imdb: return "imdb";
    case DatasetKind::csv: return "csv";
    case DatasetKind::corpus: return "corpus";
    case DatasetKind::synthetic: return "synthetic";
  }
  return "synthetic";
}

void RunConfig::validate() const {
  if (dataset.kind != DatasetKind::synthetic && dataset.path.empty()) {
    throw ConfigError("dataset.path is required for kind " + std::string(dataset_kind_name(dataset.kind)));
  }
  if (dataset.classes < 2) throw ConfigError("dataset.classes must be at least 2");
  if (dataset.kind == DatasetKind::synthetic) {
    dataset.synthetic.validate();
    if (dataset.classes != 2) throw ConfigError("synthetic corpora have exactly 2 classes");
  }
  if (!dataset.label_map.empty()) parse_label_map(dataset.label_map);
  if (min_count == 0) throw ConfigError("preprocess.min_count must be at least 1");
  ModelConfig m = model;
  m.classes = dataset.classes;
  m.validate();
  train.validate();
  if (output_directory.empty()) throw ConfigError("output.directory must not be empty");
}

std::string format_level(const LevelConfig& level) {
  std::string out;
  for (const auto& layer : level.layers) {
    if (!out.empty()) out += ", ";
    out += std::to_string(layer.maps) + "x" + std::to_string(layer.width);
    if (layer.pool.mode == PoolMode::fixed) {
      out += ":fixed:" + std::to_string(layer.pool.k_top);
    } else {
      out += ":dynamic:" + std::to_string(layer.pool.k_top) + ":" + number(layer.pool.fraction);
    }
  }
  return out;
}

LevelConfig parse_level(std::string_view text) {
  LevelConfig level;
  if (trim(text).empty()) return level;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    const auto x = parts[0].find('x');
    if (x == std::string::npos || parts.size() < 3) {
      throw ConfigError("layer '" + item + "': expected MAPSxWIDTH:fixed:K or MAPSxWIDTH:dynamic:K_TOP:FRACTION");
    }
    LayerSpec layer;
    layer.maps = to_size(parts[0].substr(0, x), "layer maps");
    layer.width = to_size(parts[0].substr(x + 1), "layer width");
    if (parts[1] == "fixed" && parts.size() == 3) {
      layer.pool = PoolSpec::fixed(to_size(parts[2], "layer k"));
    } else if (parts[1] == "dynamic" && parts.size() == 4) {
      layer.pool = PoolSpec::dynamic(to_size(parts[2], "layer k_top"), to_double(parts[3], "layer fraction"));
    } else {
      throw ConfigError("layer '" + item + "': unknown pooling '" + parts[1] + "'");
    }
    level.layers.push_back(layer);
  }
  return level;
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      bool known = false;
      for (const auto& k : keys()) known = known || k.section == section;
      if (!known) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string name = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ConfigError(where + "key '" + name + "' outside any section");
    const Key* key = nullptr;
    for (const auto& k : keys()) {
      if (k.section == section && k.name == name) key = &k;
    }
    if (key == nullptr) throw ConfigError(where + "unknown key '" + section + "." + name + "'");
    if (!seen.insert(section + "." + name).second) {
      throw ConfigError(where + "duplicate key '" + section + "." + name + "'");
    }
    try {
      key->set(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  config.model.classes = config.dataset.classes;
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    out += k.name + " = " + k.get(config) + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_config(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

const std::map<std::string, RunConfig>& preset_configs() {
  static const std::map<std::string, RunConfig> presets = [] {
    std::map<std::string, RunConfig> out;

    RunConfig imdb;
    imdb.dataset.kind = DatasetKind::imdb;
    imdb.dataset.path = "aclImdb";
    imdb.dataset.sentence_split = true;
    imdb.min_count = 5;
    imdb.model.embedding_dim = 10;
    imdb.model.sentence = parse_level("6x5:fixed:4");
    imdb.model.document = parse_level("15x5:fixed:2");
    imdb.train.learning_rate = 0.05;
    imdb.train.l2 = 1e-5;
    imdb.train.batch_size = 16;
    imdb.train.epochs = 10;
    imdb.train.threads = 4;
    imdb.output_directory = "runs/imdb";
    out.emplace("imdb-hierarchical", imdb);

    // Tweets are single sentences, so there is no document level.
    RunConfig twitter;
    twitter.dataset.kind = DatasetKind::csv;
    twitter.dataset.path = "tweets.csv";
    twitter.dataset.sentence_split = false;
    twitter.min_count = 1;
    twitter.model.embedding_dim = 60;
    twitter.model.sentence = parse_level("6x7:dynamic:4:0.5, 14x5:fixed:4");
    twitter.train.learning_rate = 0.05;
    twitter.train.l2 = 1e-5;
    twitter.train.batch_size = 16;
    twitter.train.epochs = 10;
    twitter.train.threads = 4;
    twitter.output_directory = "runs/twitter";
    out.emplace("twitter-dcnn-like", twitter);
    return out;
  }();
  return presets;
}

RunConfig preset(std::string_view name) {
  const auto& all = preset_configs();
  const auto it = all.find(std::string(name));
  if (it == all.end()) {
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected imdb-hierarchical or twitter-dcnn-like)");
  }
  return it->second;
}

}  // namespace docconv
