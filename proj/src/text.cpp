#include "docconv/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "docconv/binary_io.hpp"
#include "docconv/errors.hpp"
#include "docconv/log.hpp"

namespace docconv {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}
bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the entity starting at text[0] == '&'. Returns characters consumed,
// or 0 when it is not a recognised entity.
std::size_t decode_entity(std::string_view text, std::string& out) {
  const std::size_t semi = text.find(';');
  if (semi == std::string_view::npos || semi > 10) return 0;
  const std::string_view name = text.substr(1, semi - 1);
  if (name == "amp") {
    out.push_back('&');
  } else if (name == "lt") {
    out.push_back('<');
  } else if (name == "gt") {
    out.push_back('>');
  } else if (name == "quot") {
    out.push_back('"');
  } else if (name.size() >= 2 && name[0] == '#') {
    const bool hex = name[1] == 'x' || name[1] == 'X';
    const std::string_view digits = name.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    unsigned long cp = 0;
    for (char c : digits) {
      int v;
      if (is_digit(c)) {
        v = c - '0';
      } else if (hex && std::isxdigit(static_cast<unsigned char>(c))) {
        v = std::tolower(static_cast<unsigned char>(c)) - 'a' + 10;
      } else {
        return 0;
      }
      cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(v);
      if (cp > 0x10FFFF) return 0;
    }
    if (cp == 0) return 0;
    append_utf8(out, cp);
  } else {
    return 0;
  }
  return semi + 1;
}

bool is_numeric(std::string_view t) {
  std::size_t i = 0;
  if (i < t.size() && (t[i] == '+' || t[i] == '-')) ++i;
  const std::size_t int_start = i;
  while (i < t.size() && is_digit(t[i])) ++i;
  if (i == int_start) return false;
  if (i == t.size()) return true;
  if (t[i] != '.') return false;
  ++i;
  const std::size_t frac_start = i;
  while (i < t.size() && is_digit(t[i])) ++i;
  return i > frac_start && i == t.size();
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::validation: return "validation";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  if (name == "validation") return Split::validation;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

std::string strip_html(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == '<' && i + 1 < raw.size()) {
      const char next = raw[i + 1];
      const bool tag_like = std::isalpha(static_cast<unsigned char>(next)) || next == '/' ||
                            next == '!' || next == '?';
      const std::size_t close = raw.find('>', i + 1);
      if (tag_like && close != std::string_view::npos) {
        out.push_back(' ');
        i = close + 1;
        continue;
      }
    } else if (c == '&') {
      if (const std::size_t used = decode_entity(raw.substr(i), out); used > 0) {
        i += used;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminator(text[i])) {
      ++i;
      continue;
    }
    while (i < text.size() && is_terminator(text[i])) ++i;
    if (i == text.size() || is_space(text[i])) {
      if (auto s = trim(text.substr(start, i - start)); !s.empty()) sentences.push_back(std::move(s));
      start = i;
    }
  }
  if (auto s = trim(text.substr(start)); !s.empty()) sentences.push_back(std::move(s));
  return sentences;
}

std::vector<std::string> tokenize(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  auto all_digits = [](const std::string& s) {
    std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
      if (!is_digit(s[i])) return false;
    }
    return true;
  };

  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const char c = sentence[i];
    const char next = i + 1 < sentence.size() ? sentence[i + 1] : '\0';
    if (is_space(c)) {
      flush();
    } else if (is_word_char(c)) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (c == '\'' && !current.empty() && is_word_char(next)) {
      current.push_back(c);
    } else if (c == '.' && all_digits(current) && is_digit(next)) {
      current.push_back(c);
    } else if ((c == '-' || c == '+') && current.empty() && is_digit(next)) {
      current.push_back(c);
    } else {
      flush();
      tokens.emplace_back(1, c);
    }
  }
  flush();
  return tokens;
}

std::string normalize_token(std::string_view token) {
  if (is_numeric(token)) return std::string(reserved::number);
  if (token.size() == 1 && !is_word_char(token[0]) && !is_terminator(token[0]) && !is_space(token[0])) {
    return std::string(reserved::symbol);
  }
  return std::string(token);
}

std::vector<std::string> preprocess_sentence(std::string_view sentence) {
  auto tokens = tokenize(sentence);
  for (auto& t : tokens) t = normalize_token(t);
  return tokens;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary()
    : Vocabulary(from_tokens({std::string(reserved::pad), std::string(reserved::unknown),
                              std::string(reserved::number), std::string(reserved::symbol)})) {}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::size_t min_count) {
  const std::string_view expected[] = {reserved::pad, reserved::unknown, reserved::number,
                                       reserved::symbol};
  if (tokens.size() < kReserved) throw DataError("vocabulary is missing its reserved tokens");
  for (std::size_t i = 0; i < kReserved; ++i) {
    if (tokens[i] != expected[i]) {
      throw DataError("vocabulary id " + std::to_string(i) + " must be " + std::string(expected[i]) +
                      ", found '" + tokens[i] + "'");
    }
  }
  Vocabulary v(std::move(tokens), min_count);
  return v;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::size_t min_count)
    : tokens_(std::move(tokens)), min_count_(min_count) {
  index_.reserve(tokens_.size());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw DataError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
    h = fnv1a(tokens_[i], h);
    const unsigned char sep = 0;
    h = fnv1a(std::span(&sep, 1), h);
  }
  hash_ = h;
}

TokenId Vocabulary::id(std::string_view token) const {
  return find(token).value_or(kUnknown);
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw DataError("token id " + std::to_string(id) + " outside vocabulary of size " +
                    std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

void VocabularyBuilder::add(std::string_view token) {
  ++counts_[std::string(token)];
  ++total_;
}

void VocabularyBuilder::add(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) add(t);
}

Vocabulary VocabularyBuilder::freeze(std::size_t min_count) const {
  if (total_ == 0) throw DataError("cannot build a vocabulary from an empty corpus");
  if (min_count == 0) min_count = 1;
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [token, count] : counts_) {
    if (count < min_count) continue;
    if (token == reserved::pad || token == reserved::unknown || token == reserved::number ||
        token == reserved::symbol) {
      continue;
    }
    kept.emplace_back(token, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens = {std::string(reserved::pad), std::string(reserved::unknown),
                                     std::string(reserved::number), std::string(reserved::symbol)};
  for (auto& [token, count] : kept) tokens.push_back(token);
  return Vocabulary::from_tokens(std::move(tokens), min_count);
}

// ---------------------------------------------------------------------------

std::size_t Document::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::vector<std::size_t> Corpus::label_counts() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (const auto& d : documents) {
    if (d.label && *d.label < class_count) ++counts[*d.label];
  }
  return counts;
}

PreparedDocument prepare_document(const RawDocument& raw, bool sentence_split) {
  PreparedDocument doc{raw.source_id, raw.label, {}, {}, {}};
  const std::string clean = strip_html(raw.text);
  std::vector<std::string> pieces;
  if (sentence_split) {
    pieces = split_sentences(clean);
  } else if (auto t = trim(clean); !t.empty()) {
    pieces.push_back(std::move(t));
  }
  for (auto& sentence : pieces) {
    auto surface = tokenize(sentence);
    if (surface.empty()) continue;
    std::vector<std::string> tokens;
    tokens.reserve(surface.size());
    for (const auto& t : surface) tokens.push_back(normalize_token(t));
    doc.sentence_text.push_back(std::move(sentence));
    doc.tokens.push_back(std::move(tokens));
    doc.surface.push_back(std::move(surface));
  }
  return doc;
}

Document encode_prepared(const PreparedDocument& doc, const Vocabulary& vocab) {
  if (doc.tokens.empty()) {
    throw DataError("document '" + doc.source_id + "' has no sentences after preprocessing");
  }
  Document out{doc.source_id, doc.label, {}, doc.sentence_text, doc.surface};
  out.sentences.reserve(doc.tokens.size());
  for (const auto& sentence : doc.tokens) {
    std::vector<TokenId> ids;
    ids.reserve(sentence.size());
    for (const auto& t : sentence) ids.push_back(vocab.id(t));
    out.sentences.push_back(std::move(ids));
  }
  return out;
}

Document encode_document(std::string_view text, std::optional<std::size_t> label,
                         const Vocabulary& vocab, std::string source_id, bool sentence_split) {
  if (text.empty()) throw DataError("document '" + source_id + "' is empty");
  return encode_prepared(
      prepare_document(RawDocument{std::move(source_id), std::string(text), label}, sentence_split),
      vocab);
}

Vocabulary build_vocabulary(const std::vector<PreparedDocument>& training_docs,
                            std::size_t min_count) {
  VocabularyBuilder builder;
  for (const auto& doc : training_docs) {
    for (const auto& sentence : doc.tokens) builder.add(sentence);
  }
  return builder.freeze(min_count);
}

std::vector<PreparedDocument> prepare_corpus(const RawCorpus& raw) {
  std::vector<PreparedDocument> out;
  out.reserve(raw.documents.size());
  for (const auto& d : raw.documents) out.push_back(prepare_document(d, raw.sentence_split));
  return out;
}

Corpus encode_corpus(const std::vector<PreparedDocument>& docs, const Vocabulary& vocab,
                     std::size_t class_count, Split split) {
  Corpus corpus{{}, vocab, class_count, split};
  corpus.documents.reserve(docs.size());
  std::size_t dropped = 0;
  for (const auto& d : docs) {
    if (d.tokens.empty()) {
      ++dropped;
      log_warning("skipping document '" + d.source_id + "': no sentences after preprocessing");
      continue;
    }
    if (d.label && *d.label >= class_count) {
      throw DataError("document '" + d.source_id + "' has label " + std::to_string(*d.label) +
                      " but the corpus has " + std::to_string(class_count) + " classes");
    }
    corpus.documents.push_back(encode_prepared(d, vocab));
  }
  if (dropped > 0) log_warning("dropped " + std::to_string(dropped) + " empty documents");
  return corpus;
}

// ---------------------------------------------------------------------------

RawCorpus load_imdb(const std::filesystem::path& root, Split split) {
  namespace fs = std::filesystem;
  RawCorpus corpus;
  corpus.split = split;
  corpus.class_count = 2;
  const std::pair<const char*, std::size_t> classes[] = {{"neg", 0}, {"pos", 1}};
  for (const auto& [name, label] : classes) {
    const fs::path dir = root / std::string(split_name(split)) / name;
    if (!fs::is_directory(dir)) throw DataError("IMDB directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::ifstream in(file, std::ios::binary);
      if (!in) throw DataError("cannot read " + file.string());
      std::ostringstream text;
      text << in.rdbuf();
      corpus.documents.push_back(RawDocument{
          std::string(split_name(split)) + "/" + name + "/" + file.filename().string(), text.str(),
          label});
    }
  }
  if (corpus.documents.empty()) {
    log_warning("IMDB " + std::string(split_name(split)) + " split under " + root.string() +
                " contains no documents");
  }
  return corpus;
}

std::map<std::string, std::size_t> parse_label_map(std::string_view spec) {
  std::map<std::string, std::size_t> out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string item = trim(spec.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty()) {
      if (comma >= spec.size()) break;
      continue;
    }
    const std::size_t colon = item.rfind(':');
    if (colon == std::string::npos) throw ConfigError("label map entry '" + item + "' needs raw:class");
    const std::string key = trim(item.substr(0, colon));
    const std::string value = trim(item.substr(colon + 1));
    if (value.empty() || !std::all_of(value.begin(), value.end(), is_digit)) {
      throw ConfigError("label map entry '" + item + "' has a non-integer class");
    }
    out[key] = std::stoul(value);
  }
  return out;
}

namespace {

// RFC 4180 style: quoted fields may contain delimiters, newlines and "" escapes.
std::vector<std::vector<std::string>> parse_delimited(const std::string& data, char delim) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      row_has_content = true;
    } else if (c == delim) {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') ++i;
      if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      row_has_content = false;
    } else {
      field.push_back(c);
      row_has_content = true;
    }
  }
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::size_t resolve_column(const std::string& column, const std::vector<std::string>* header) {
  if (!column.empty() && std::all_of(column.begin(), column.end(), is_digit)) {
    return std::stoul(column);
  }
  if (header == nullptr) {
    throw ConfigError("column '" + column + "' is a name but the file has no header");
  }
  for (std::size_t i = 0; i < header->size(); ++i) {
    if (trim((*header)[i]) == column) return i;
  }
  throw ConfigError("column '" + column + "' not found in header");
}

}  // namespace

RawCorpus load_labelled_csv(const std::filesystem::path& path, const CsvOptions& options,
                            Split split) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto rows = parse_delimited(buf.str(), options.delimiter);
  if (rows.empty() || (options.has_header && rows.size() == 1)) {
    throw DataError("delimited file " + path.string() + " has no data rows");
  }

  const std::vector<std::string>* header = options.has_header ? &rows.front() : nullptr;
  const std::size_t text_col = resolve_column(options.text_column, header);
  const std::size_t label_col = resolve_column(options.label_column, header);

  RawCorpus corpus;
  corpus.split = split;
  corpus.sentence_split = options.sentence_split;
  std::size_t max_label = 0;
  const std::size_t first = options.has_header ? 1 : 0;
  const std::size_t total = rows.size() - first;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() <= std::max(text_col, label_col)) {
      ++corpus.skipped_rows;
      continue;
    }
    const std::string raw_label = trim(row[label_col]);
    std::optional<std::size_t> label;
    if (!options.label_map.empty()) {
      if (auto it = options.label_map.find(raw_label); it != options.label_map.end()) label = it->second;
    } else if (!raw_label.empty() && std::all_of(raw_label.begin(), raw_label.end(), is_digit)) {
      label = std::stoul(raw_label);
    }
    if (!label || trim(row[text_col]).empty()) {
      ++corpus.skipped_rows;
      continue;
    }
    max_label = std::max(max_label, *label);
    corpus.documents.push_back(
        RawDocument{path.filename().string() + ":" + std::to_string(line), row[text_col], label});
  }

  if (corpus.skipped_rows > 0) {
    log_warning("skipped " + std::to_string(corpus.skipped_rows) + " of " + std::to_string(total) +
                " rows in " + path.string());
  }
  if (static_cast<double>(corpus.skipped_rows) > options.max_skip_fraction * static_cast<double>(total)) {
    throw DataError("too many malformed rows in " + path.string() + ": " +
                    std::to_string(corpus.skipped_rows) + " of " + std::to_string(total));
  }
  if (!options.label_map.empty()) {
    for (const auto& [raw, cls] : options.label_map) max_label = std::max(max_label, cls);
  }
  corpus.class_count = std::max<std::size_t>(2, max_label + 1);
  return corpus;
}

// ---------------------------------------------------------------------------
// Cache layout (all integers little-endian):
//   "DCCORPUS" u32 version u64 vocab_hash u8 split u32 classes
//   u32 vocab_size u32 min_count  { str token } * vocab_size
//   u64 docs { str source_id  i64 label(-1 = none)  u8 has_text
//              u32 sentences { u32 len { u32 id } * len  [str text] } * sentences } * docs
// where str is u32 length followed by UTF-8 bytes.

namespace {
constexpr char kCorpusMagic[8] = {'D', 'C', 'C', 'O', 'R', 'P', 'U', 'S'};
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write corpus cache " + path.string());
  BinaryWriter w(out);
  w.bytes(kCorpusMagic, sizeof kCorpusMagic);
  w.u32(kCorpusFormatVersion);
  w.u64(corpus.vocabulary.hash());
  w.u8(static_cast<std::uint8_t>(corpus.split));
  w.u32(static_cast<std::uint32_t>(corpus.class_count));
  w.u32(static_cast<std::uint32_t>(corpus.vocabulary.size()));
  w.u32(static_cast<std::uint32_t>(corpus.vocabulary.min_count()));
  for (const auto& t : corpus.vocabulary.tokens()) w.str(t);
  w.u64(corpus.documents.size());
  for (const auto& d : corpus.documents) {
    w.str(d.source_id);
    w.i64(d.label ? static_cast<std::int64_t>(*d.label) : -1);
    const bool has_text = d.sentence_text.size() == d.sentences.size();
    w.u8(has_text ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(d.sentences.size()));
    for (std::size_t s = 0; s < d.sentences.size(); ++s) {
      w.u32(static_cast<std::uint32_t>(d.sentences[s].size()));
      for (TokenId id : d.sentences[s]) w.u32(id);
      if (has_text) w.str(d.sentence_text[s]);
    }
  }
  if (!out) throw DataError("failed writing corpus cache " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus cache " + path.string());
  BinaryReader r(in, path.string());
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kCorpusMagic))) {
    throw DataError(path.string() + " is not a corpus cache");
  }
  if (const auto version = r.u32(); version != kCorpusFormatVersion) {
    throw DataError(path.string() + ": corpus format version " + std::to_string(version) +
                    " unsupported (expected " + std::to_string(kCorpusFormatVersion) + ")");
  }
  const std::uint64_t hash = r.u64();
  const auto split = static_cast<Split>(r.u8());
  const std::size_t classes = r.u32();
  const std::size_t vocab_size = r.u32();
  const std::size_t min_count = r.u32();
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) tokens.push_back(r.str());
  Corpus corpus{{}, Vocabulary::from_tokens(std::move(tokens), min_count), classes, split};
  if (corpus.vocabulary.hash() != hash) {
    throw DataError(path.string() + ": vocabulary hash mismatch (file corrupt)");
  }
  const std::uint64_t docs = r.u64();
  corpus.documents.reserve(static_cast<std::size_t>(docs));
  for (std::uint64_t i = 0; i < docs; ++i) {
    Document d;
    d.source_id = r.str();
    if (const std::int64_t label = r.i64(); label >= 0) d.label = static_cast<std::size_t>(label);
    const bool has_text = r.u8() != 0;
    const std::uint32_t sentences = r.u32();
    for (std::uint32_t s = 0; s < sentences; ++s) {
      std::vector<TokenId> ids(r.u32());
      for (auto& id : ids) {
        id = r.u32();
        if (id >= vocab_size) throw DataError(path.string() + ": token id out of range");
      }
      d.sentences.push_back(std::move(ids));
      if (has_text) d.sentence_text.push_back(r.str());
    }
    corpus.documents.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace docconv
