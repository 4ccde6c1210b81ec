#include "docconv/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "docconv/binary_io.hpp"
#include "docconv/errors.hpp"

namespace docconv {

namespace {

constexpr char kMagic[8] = {'D', 'C', 'M', 'O', 'D', 'E', 'L', '1'};

void write_level(BinaryWriter& w, const LevelConfig& level) {
  w.u32(static_cast<std::uint32_t>(level.layers.size()));
  for (const auto& l : level.layers) {
    w.u32(static_cast<std::uint32_t>(l.width));
    w.u32(static_cast<std::uint32_t>(l.maps));
    w.u8(l.pool.mode == PoolMode::fixed ? 0 : 1);
    w.u32(static_cast<std::uint32_t>(l.pool.k_top));
    w.f64(l.pool.fraction);
  }
}

LevelConfig read_level(BinaryReader& r) {
  LevelConfig level;
  const std::uint32_t n = r.u32();
  if (n > 64) throw DataError("model file declares " + std::to_string(n) + " layers");
  for (std::uint32_t i = 0; i < n; ++i) {
    LayerSpec l;
    l.width = r.u32();
    l.maps = r.u32();
    const std::uint8_t mode = r.u8();
    if (mode > 1) throw DataError("model file has unknown pooling mode " + std::to_string(mode));
    l.pool.mode = mode == 0 ? PoolMode::fixed : PoolMode::dynamic;
    l.pool.k_top = r.u32();
    l.pool.fraction = r.f64();
    level.layers.push_back(l);
  }
  return level;
}

}  // namespace

void save_model(const ModelParams& params, const Vocabulary& vocab, const std::filesystem::path& path) {
  validate_params(params);
  if (vocab.size() != params.config.vocab_size) {
    throw ConfigError("vocabulary has " + std::to_string(vocab.size()) + " tokens but the model expects " +
                      std::to_string(params.config.vocab_size));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model file " + path.string());
  BinaryWriter w(out);
  const auto& cfg = params.config;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.u64(vocab.hash());
  w.u32(static_cast<std::uint32_t>(cfg.embedding_dim));
  w.u32(static_cast<std::uint32_t>(cfg.vocab_size));
  w.u32(static_cast<std::uint32_t>(cfg.classes));
  write_level(w, cfg.sentence);
  write_level(w, cfg.document);
  w.u32(static_cast<std::uint32_t>(vocab.size()));
  for (const auto& t : vocab.tokens()) w.str(t);

  w.f64s(params.embedding.values());
  for (const auto* banks : {&params.sentence_banks, &params.document_banks}) {
    for (const auto& b : *banks) {
      w.f64s(b.weights());
      w.f64s(b.bias());
    }
  }
  w.f64s(params.head_weights.values());
  w.f64s(params.head_bias);
  if (!out) throw DataError("failed writing model file " + path.string());
}

SavedModel load_model(const std::filesystem::path& path, std::optional<std::uint64_t> expected_vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file " + path.string());
  BinaryReader r(in, path.string());

  char magic[8];
  r.bytes(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw DataError(path.string() + " is not a model file");
  }
  if (const auto version = r.u32(); version != kModelFormatVersion) {
    throw ConfigError(path.string() + ": model format version " + std::to_string(version) +
                      " unsupported (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const std::uint64_t vocab_hash = r.u64();
  if (expected_vocab_hash && *expected_vocab_hash != vocab_hash) {
    throw ConfigError(path.string() + ": vocabulary hash " + hex64(vocab_hash) + " does not match expected " +
                      hex64(*expected_vocab_hash));
  }

  ModelConfig cfg;
  cfg.embedding_dim = r.u32();
  cfg.vocab_size = r.u32();
  cfg.classes = r.u32();
  cfg.sentence = read_level(r);
  cfg.document = read_level(r);
  cfg.validate();

  const std::uint32_t n_tokens = r.u32();
  if (n_tokens != cfg.vocab_size) throw DataError(path.string() + ": token list does not match vocabulary size");
  std::vector<std::string> tokens;
  tokens.reserve(n_tokens);
  for (std::uint32_t i = 0; i < n_tokens; ++i) tokens.push_back(r.str());
  Vocabulary vocab = Vocabulary::from_tokens(std::move(tokens));
  if (vocab.hash() != vocab_hash) throw DataError(path.string() + ": stored vocabulary is corrupt (hash mismatch)");

  ModelParams p = init_params(cfg, 0);
  r.f64s(p.embedding.values());
  for (auto* banks : {&p.sentence_banks, &p.document_banks}) {
    for (auto& b : *banks) {
      r.f64s(b.weights());
      r.f64s(b.bias());
    }
  }
  r.f64s(p.head_weights.values());
  r.f64s(p.head_bias);
  if (!r.at_end()) throw DataError(path.string() + ": trailing bytes after parameter blocks");
  return SavedModel{std::move(p), std::move(vocab)};
}

std::uint64_t file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a(bytes);
}

}  // namespace docconv
