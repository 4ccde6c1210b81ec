#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "docconv/model.hpp"
#include "docconv/synthetic.hpp"
#include "docconv/text.hpp"
#include "docconv/train.hpp"

namespace docconv {

enum class DatasetKind { imdb, csv, corpus, synthetic };

std::string_view dataset_kind_name(DatasetKind kind);

struct DatasetConfig {
  DatasetKind kind = DatasetKind::synthetic;
  std::string path;       // IMDB root, CSV file or encoded corpus
  std::string test_path;  // optional held-out CSV or corpus
  std::string text_column = "text";
  std::string label_column = "label";
  char delimiter = ',';
  bool has_header = true;
  std::string label_map;  // "negative:0,positive:1"; empty means integer labels
  bool sentence_split = false;
  std::size_t classes = 2;
  SyntheticOptions synthetic;
};

/// Everything a run needs. Serializes to sectioned key = value text:
///
///   [dataset] kind, path, test_path, text_column, label_column, delimiter,
///             has_header, label_map, sentence_split, classes
///   [synthetic] documents, min_sentences, max_sentences, min_planted,
///               max_planted, min_words, max_words, seed
///   [preprocess] min_count
///   [model] embedding_dim, sentence, document
///   [train] learning_rate, l2, dropout, batch_size, epochs,
///           validation_fraction, threads, train_biases, stop_at_validation
///   [seeds] init, train
///   [output] directory
///
/// Level strings list layers separated by commas, each "MAPSxWIDTH:fixed:K"
/// or "MAPSxWIDTH:dynamic:K_TOP:FRACTION".
struct RunConfig {
  DatasetConfig dataset;
  std::size_t min_count = 5;
  ModelConfig model;  // vocab_size is filled in from the vocabulary at train time
  TrainOptions train;
  std::uint64_t init_seed = 1;
  std::string output_directory = "runs";

  // Throws ConfigError.
  void validate() const;
};

std::string format_level(const LevelConfig& level);
LevelConfig parse_level(std::string_view text);

/// Unknown sections or keys, malformed values and duplicate keys are
/// ConfigErrors that name the line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Canonical text: every key, fixed order, shortest round-tripping numbers.
std::string serialize_config(const RunConfig& config);

// FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// "imdb-hierarchical" and "twitter-dcnn-like".
const std::map<std::string, RunConfig>& preset_configs();
RunConfig preset(std::string_view name);

}  // namespace docconv
