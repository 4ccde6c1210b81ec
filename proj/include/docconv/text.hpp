#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace docconv {

using TokenId = std::uint32_t;

enum class Split { train, test, validation };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

// ---------------------------------------------------------------------------
// Preprocessing rules
// ---------------------------------------------------------------------------

/// Replaces every <tag ...> span with one space and decodes &amp; &lt; &gt;
/// &quot; and numeric &#NN; / &#xHH; entities. A '<' that never closes is
/// kept as literal text.
std::string strip_html(std::string_view raw);

/// Splits after each maximal run of '.', '?' or '!' that is followed by
/// whitespace. A trailing fragment without a terminator becomes the last
/// sentence. Sentences are trimmed; empty ones are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Lowercases ASCII, splits on whitespace and emits every punctuation
/// character as its own token. Apostrophes between letters stay inside the
/// word ("don't"), as do a decimal point between digits and a leading sign
/// directly before a digit. Bytes >= 0x80 are treated as word characters.
std::vector<std::string> tokenize(std::string_view sentence);

/// Maps numeric tokens (optional sign, digits, optional decimal part) to
/// NUMBER and single punctuation tokens other than . ? ! to SYMBOL. All other
/// tokens pass through.
std::string normalize_token(std::string_view token);

// tokenize() followed by normalize_token() on every token.
std::vector<std::string> preprocess_sentence(std::string_view sentence);

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

namespace reserved {
inline constexpr std::string_view pad = "PAD";
inline constexpr std::string_view unknown = "UNKNOWN";
inline constexpr std::string_view number = "NUMBER";
inline constexpr std::string_view symbol = "SYMBOL";
}  // namespace reserved

/// Bijection between retained tokens and dense ids. Ids 0..3 are always
/// PAD, UNKNOWN, NUMBER, SYMBOL. The lowercasing tokenizer cannot produce
/// these upper-case spellings, so they never collide with real words.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnknown = 1;
  static constexpr TokenId kNumber = 2;
  static constexpr TokenId kSymbol = 3;
  static constexpr std::size_t kReserved = 4;

  Vocabulary();

  // `tokens` in id order; must start with the four reserved tokens.
  static Vocabulary from_tokens(std::vector<std::string> tokens, std::size_t min_count = 1);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t min_count() const noexcept { return min_count_; }

  // UNKNOWN for tokens that were not retained.
  TokenId id(std::string_view token) const;
  std::optional<TokenId> find(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // FNV-1a over the token list in id order; identifies the vocabulary in
  // corpus caches and model files.
  std::uint64_t hash() const noexcept { return hash_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  Vocabulary(std::vector<std::string> tokens, std::size_t min_count);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t min_count_ = 1;
  std::uint64_t hash_ = 0;
};

/// Two-pass construction: count every token of the training split, then
/// freeze the ones seen at least `min_count` times. Retained tokens are
/// ordered by descending count, ties broken lexicographically.
class VocabularyBuilder {
 public:
  void add(std::string_view token);
  void add(const std::vector<std::string>& tokens);
  std::size_t total_tokens() const noexcept { return total_; }
  Vocabulary freeze(std::size_t min_count) const;

 private:
  std::unordered_map<std::string, std::size_t> counts_;
  std::size_t total_ = 0;
};

// ---------------------------------------------------------------------------
// Documents and corpora
// ---------------------------------------------------------------------------

struct RawDocument {
  std::string source_id;
  std::string text;
  std::optional<std::size_t> label;
};

struct RawCorpus {
  std::vector<RawDocument> documents;
  std::size_t class_count = 2;
  Split split = Split::train;
  bool sentence_split = true;  // false: each text is a single sentence (tweets)
  std::size_t skipped_rows = 0;
};

/// A preprocessed document before vocabulary lookup.
struct PreparedDocument {
  std::string source_id;
  std::optional<std::size_t> label;
  std::vector<std::string> sentence_text;
  std::vector<std::vector<std::string>> tokens;   // normalized, one list per sentence
  std::vector<std::vector<std::string>> surface;  // tokenizer output before normalization
};

struct Document {
  std::string source_id;
  std::optional<std::size_t> label;
  std::vector<std::vector<TokenId>> sentences;
  // Display forms; empty when the document came from a cache. `tokens` holds
  // the tokenizer output aligned 1:1 with `sentences`.
  std::vector<std::string> sentence_text;
  std::vector<std::vector<std::string>> tokens;

  std::size_t token_count() const;
};

struct Corpus {
  std::vector<Document> documents;
  Vocabulary vocabulary;
  std::size_t class_count = 2;
  Split split = Split::train;

  // Per-class document counts (unlabelled documents are not counted).
  std::vector<std::size_t> label_counts() const;
};

/// Runs HTML stripping, sentence splitting, tokenization and normalization.
/// Sentences that end up without tokens are dropped.
PreparedDocument prepare_document(const RawDocument& raw, bool sentence_split = true);

Document encode_prepared(const PreparedDocument& doc, const Vocabulary& vocab);

/// Full pipeline for one text. Throws DataError (naming `source_id`) when the
/// text is empty or reduces to zero sentences.
Document encode_document(std::string_view text, std::optional<std::size_t> label,
                         const Vocabulary& vocab, std::string source_id = "<input>",
                         bool sentence_split = true);

Vocabulary build_vocabulary(const std::vector<PreparedDocument>& training_docs,
                            std::size_t min_count = 5);

// Documents that reduce to zero sentences are skipped with a warning.
Corpus encode_corpus(const std::vector<PreparedDocument>& docs, const Vocabulary& vocab,
                     std::size_t class_count, Split split);

std::vector<PreparedDocument> prepare_corpus(const RawCorpus& raw);

// ---------------------------------------------------------------------------
// Loaders
// ---------------------------------------------------------------------------

/// Reads <root>/<split>/{neg,pos}/*.txt; neg is label 0, pos label 1. Files
/// are visited in sorted order.
RawCorpus load_imdb(const std::filesystem::path& root, Split split);

struct CsvOptions {
  char delimiter = ',';
  // Column names (with header) or zero-based indices given as digits.
  std::string text_column = "text";
  std::string label_column = "label";
  bool has_header = true;
  // Raw label string -> class index. Empty: labels must be non-negative integers.
  std::map<std::string, std::size_t> label_map;
  bool sentence_split = false;
  double max_skip_fraction = 0.01;
};

/// One document per data row. Rows with missing fields or unmappable labels
/// are skipped and counted; more than `max_skip_fraction` skipped is an error.
RawCorpus load_labelled_csv(const std::filesystem::path& path, const CsvOptions& options,
                            Split split = Split::train);

// Parses "a:0,b:1" into a label map.
std::map<std::string, std::size_t> parse_label_map(std::string_view spec);

// ---------------------------------------------------------------------------
// Preprocessed-corpus cache
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kCorpusFormatVersion = 1;

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace docconv
