#include "docconv/model.hpp"

#include <algorithm>
#include <cmath>

#include "docconv/activations.hpp"
#include "docconv/errors.hpp"
#include "docconv/random.hpp"

namespace docconv {

namespace {

std::string layer_name(const char* level, std::size_t i) {
  return std::string(level) + " layer " + std::to_string(i + 1);
}

void validate_level(const LevelConfig& level, const char* name, bool allow_empty) {
  if (level.layers.empty()) {
    if (allow_empty) return;
    throw ConfigError(std::string(name) + " level needs at least one layer");
  }
  for (std::size_t i = 0; i < level.layers.size(); ++i) {
    const auto& layer = level.layers[i];
    if (layer.width == 0 || layer.maps == 0) {
      throw ConfigError(layer_name(name, i) + ": width and maps must be positive");
    }
    try {
      layer.pool.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(layer_name(name, i) + ": " + e.what());
    }
  }
  if (level.layers.back().pool.mode != PoolMode::fixed) {
    throw ConfigError(layer_name(name, level.layers.size() - 1) +
                      ": the last layer of a level must use fixed k-max pooling");
  }
}

std::vector<FilterBank> make_banks(const LevelConfig& level, std::size_t input_depth) {
  std::vector<FilterBank> banks;
  std::size_t depth = input_depth;
  for (const auto& layer : level.layers) {
    banks.emplace_back(depth, layer.width, layer.maps);
    depth = layer.maps;
  }
  return banks;
}

void check_banks(const std::vector<FilterBank>& banks, const LevelConfig& level,
                 std::size_t input_depth, const char* name) {
  if (banks.size() != level.layers.size()) {
    throw ConfigError(std::string(name) + " level has " + std::to_string(banks.size()) +
                      " filter banks for " + std::to_string(level.layers.size()) + " layers");
  }
  std::size_t depth = input_depth;
  for (std::size_t i = 0; i < banks.size(); ++i) {
    const auto& b = banks[i];
    const auto& l = level.layers[i];
    if (b.depth() != depth || b.width() != l.width || b.maps() != l.maps) {
      throw ConfigError(layer_name(name, i) + ": filter bank shape does not chain with the previous layer");
    }
    depth = l.maps;
  }
}

void fill_uniform(std::span<double> values, double bound, Rng& rng) {
  for (double& v : values) v = rng.uniform(-bound, bound);
}

// Gradient of one level's layers given dL/d(level output). Accumulates the
// filter-bank gradients into `bank_grads` and returns dL/d(level input).
Matrix level_backward(Matrix grad, const std::vector<LayerTrace>& traces,
                      const std::vector<FilterBank>& banks, std::vector<FilterBank>& bank_grads) {
  for (std::size_t l = traces.size(); l-- > 0;) {
    const auto& t = traces[l];
    grad = tanh_backward(grad, t.output);
    grad = kmax_backward(grad, t.selection);
    ConvGradient cg = wide_conv_backward(grad, t.input, banks[l]);
    auto dst_w = bank_grads[l].weights();
    auto src_w = cg.bank.weights();
    for (std::size_t i = 0; i < dst_w.size(); ++i) dst_w[i] += src_w[i];
    auto dst_b = bank_grads[l].bias();
    auto src_b = cg.bank.bias();
    for (std::size_t i = 0; i < dst_b.size(); ++i) dst_b[i] += src_b[i];
    grad = std::move(cg.input);
  }
  return grad;
}

Matrix unflatten_feature_major(std::span<const double> flat, std::size_t rows, std::size_t cols) {
  return Matrix(rows, cols, std::vector<double>(flat.begin(), flat.end()));
}

}  // namespace

void ModelConfig::validate() const {
  if (embedding_dim == 0) throw ConfigError("embedding dimension must be positive");
  if (vocab_size < Vocabulary::kReserved) {
    throw ConfigError("vocabulary size " + std::to_string(vocab_size) + " is smaller than the reserved tokens");
  }
  if (classes == 0) throw ConfigError("model needs at least one class");
  validate_level(sentence, "sentence", false);
  validate_level(document, "document", true);
}

std::size_t ModelConfig::sentence_embedding_dim() const {
  if (sentence.layers.empty()) return 0;
  const auto& last = sentence.layers.back();
  return last.maps * last.pool.k_top;
}

std::size_t ModelConfig::document_embedding_dim() const {
  if (document.layers.empty()) return sentence_embedding_dim();
  const auto& last = document.layers.back();
  return last.maps * last.pool.k_top;
}

void validate_params(const ModelParams& params) {
  const auto& cfg = params.config;
  cfg.validate();
  if (params.embedding.rows() != cfg.embedding_dim || params.embedding.cols() != cfg.vocab_size) {
    throw ConfigError("embedding table " + shape_string(params.embedding) + " does not match config");
  }
  check_banks(params.sentence_banks, cfg.sentence, cfg.embedding_dim, "sentence");
  check_banks(params.document_banks, cfg.document, cfg.sentence_embedding_dim(), "document");
  if (params.head_weights.rows() != cfg.classes ||
      params.head_weights.cols() != cfg.document_embedding_dim() || params.head_bias.size() != cfg.classes) {
    throw ConfigError("softmax head shape does not match config");
  }
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams p{config,
                Matrix(config.embedding_dim, config.vocab_size),
                make_banks(config.sentence, config.embedding_dim),
                make_banks(config.document, config.sentence_embedding_dim()),
                Matrix(config.classes, config.document_embedding_dim()),
                std::vector<double>(config.classes, 0.0)};

  Rng rng(seed);
  for (std::size_t r = 0; r < p.embedding.rows(); ++r) {
    for (std::size_t c = 0; c < p.embedding.cols(); ++c) {
      p.embedding(r, c) = c == Vocabulary::kPad ? 0.0 : rng.uniform(-0.1, 0.1);
    }
  }
  for (auto* banks : {&p.sentence_banks, &p.document_banks}) {
    for (auto& bank : *banks) {
      fill_uniform(bank.weights(), glorot_bound(bank.depth() * bank.width(), bank.maps()), rng);
    }
  }
  fill_uniform(p.head_weights.values(), glorot_bound(p.head_weights.cols(), p.head_weights.rows()), rng);
  return p;
}

// ---------------------------------------------------------------------------

Matrix build_sentence_matrix(std::span<const TokenId> ids, const Matrix& embedding) {
  Matrix m(embedding.rows(), ids.size());
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (ids[j] >= embedding.cols()) {
      throw DataError("token id " + std::to_string(ids[j]) + " outside embedding table of " +
                      std::to_string(embedding.cols()) + " words");
    }
    for (std::size_t r = 0; r < embedding.rows(); ++r) m(r, j) = embedding(r, ids[j]);
  }
  return m;
}

std::vector<LayerTrace> level_forward(const Matrix& input, const std::vector<FilterBank>& banks,
                                      const LevelConfig& level, std::size_t sequence_length) {
  std::vector<LayerTrace> traces;
  traces.reserve(level.layers.size());
  Matrix x = input;
  for (std::size_t l = 0; l < level.layers.size(); ++l) {
    Matrix conv = wide_conv_forward(x, banks[l]);
    PoolResult pooled = kmax_forward(conv, level.layers[l].pool, sequence_length);
    Matrix out = tanh_forward(pooled.output);
    traces.push_back(LayerTrace{std::move(x), std::move(pooled.selection), std::move(pooled.output), out});
    x = std::move(out);
  }
  return traces;
}

std::vector<double> flatten_feature_major(const Matrix& pooled) {
  auto v = pooled.values();
  return {v.begin(), v.end()};
}

SentenceEmbedding sentence_forward(const Matrix& sentence_matrix, const ModelParams& params) {
  if (sentence_matrix.rows() != params.config.embedding_dim) {
    throw ConfigError("sentence matrix " + shape_string(sentence_matrix) + " does not match embedding dim " +
                      std::to_string(params.config.embedding_dim));
  }
  SentenceEmbedding out;
  out.traces = level_forward(sentence_matrix, params.sentence_banks, params.config.sentence,
                             sentence_matrix.cols());
  out.embedding = flatten_feature_major(out.traces.back().output);
  return out;
}

DocForwardTrace forward(const Document& doc, const ModelParams& params, const ForwardOptions& options) {
  const auto& cfg = params.config;
  if (doc.sentences.empty()) {
    throw DataError("document '" + doc.source_id + "' has no sentences");
  }
  DocForwardTrace t;
  t.token_ids = doc.sentences;
  const std::size_t n_sent = doc.sentences.size();
  t.doc_matrix = Matrix(cfg.sentence_embedding_dim(), n_sent);
  t.sentences.reserve(n_sent);
  for (std::size_t s = 0; s < n_sent; ++s) {
    SentenceEmbedding se = sentence_forward(build_sentence_matrix(doc.sentences[s], params.embedding), params);
    t.doc_matrix.set_column(s, se.embedding);
    t.sentences.push_back(std::move(se.traces));
  }

  if (cfg.document.layers.empty()) {
    t.doc_embedding.assign(t.doc_matrix.rows(), 0.0);
    for (std::size_t r = 0; r < t.doc_matrix.rows(); ++r) {
      for (double v : t.doc_matrix.row(r)) t.doc_embedding[r] += v;
      t.doc_embedding[r] /= static_cast<double>(n_sent);
    }
  } else {
    t.document = level_forward(t.doc_matrix, params.document_banks, cfg.document, n_sent);
    t.doc_embedding = flatten_feature_major(t.document.back().output);
  }

  std::vector<double> head_input = t.doc_embedding;
  if (options.dropout > 0.0) {
    if (options.rng == nullptr) throw ConfigError("dropout requested without a random generator");
    const double keep = 1.0 - options.dropout;
    t.dropout_mask.resize(head_input.size());
    for (std::size_t i = 0; i < head_input.size(); ++i) {
      t.dropout_mask[i] = options.rng->uniform() < options.dropout ? 0.0 : 1.0 / keep;
      head_input[i] *= t.dropout_mask[i];
    }
  }

  t.logits.assign(cfg.classes, 0.0);
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    double z = params.head_bias[c];
    const auto w = params.head_weights.row(c);
    for (std::size_t i = 0; i < head_input.size(); ++i) z += w[i] * head_input[i];
    t.logits[c] = z;
  }
  t.probabilities = softmax(t.logits);
  t.predicted = static_cast<std::size_t>(
      std::max_element(t.probabilities.begin(), t.probabilities.end()) - t.probabilities.begin());
  return t;
}

Prediction predict(const Document& doc, const ModelParams& params) {
  DocForwardTrace t = forward(doc, params);
  return {t.predicted, std::move(t.probabilities)};
}

// ---------------------------------------------------------------------------

ModelGradients ModelGradients::zeros_like(const ModelParams& params) {
  ModelGradients g;
  for (const auto& b : params.sentence_banks) g.sentence_banks.emplace_back(b.depth(), b.width(), b.maps());
  for (const auto& b : params.document_banks) g.document_banks.emplace_back(b.depth(), b.width(), b.maps());
  g.head_weights = Matrix(params.head_weights.rows(), params.head_weights.cols());
  g.head_bias.assign(params.head_bias.size(), 0.0);
  return g;
}

void ModelGradients::add(const ModelGradients& other) {
  for (const auto& [id, col] : other.embedding) {
    auto [it, inserted] = embedding.try_emplace(id, col);
    if (!inserted) {
      for (std::size_t i = 0; i < col.size(); ++i) it->second[i] += col[i];
    }
  }
  auto add_span = [](std::span<double> dst, std::span<const double> src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  };
  for (std::size_t l = 0; l < sentence_banks.size(); ++l) {
    add_span(sentence_banks[l].weights(), other.sentence_banks[l].weights());
    add_span(sentence_banks[l].bias(), other.sentence_banks[l].bias());
  }
  for (std::size_t l = 0; l < document_banks.size(); ++l) {
    add_span(document_banks[l].weights(), other.document_banks[l].weights());
    add_span(document_banks[l].bias(), other.document_banks[l].bias());
  }
  add_span(head_weights.values(), other.head_weights.values());
  add_span(head_bias, other.head_bias);
}

void ModelGradients::scale(double factor) {
  auto scale_span = [factor](std::span<double> v) {
    for (double& x : v) x *= factor;
  };
  for (auto& [id, col] : embedding) scale_span(col);
  for (auto* banks : {&sentence_banks, &document_banks}) {
    for (auto& b : *banks) {
      scale_span(b.weights());
      scale_span(b.bias());
    }
  }
  scale_span(head_weights.values());
  scale_span(head_bias);
}

Matrix ModelGradients::dense_embedding(std::size_t dim, std::size_t vocab_size) const {
  Matrix m(dim, vocab_size);
  for (const auto& [id, col] : embedding) m.set_column(id, col);
  return m;
}

BackwardResult backward_from_logits(const DocForwardTrace& trace, std::span<const double> grad_logits,
                                    const ModelParams& params) {
  const auto& cfg = params.config;
  if (grad_logits.size() != cfg.classes) throw ConfigError("logit gradient has the wrong length");

  BackwardResult r;
  r.params = ModelGradients::zeros_like(params);

  // Softmax head. The head saw the embedding after dropout.
  const std::size_t dim = trace.doc_embedding.size();
  std::vector<double> grad_emb(dim, 0.0);
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    const double g = grad_logits[c];
    r.params.head_bias[c] = g;
    const auto w = params.head_weights.row(c);
    auto gw = r.params.head_weights.row(c);
    for (std::size_t i = 0; i < dim; ++i) {
      const double x = trace.dropout_mask.empty() ? trace.doc_embedding[i]
                                                  : trace.doc_embedding[i] * trace.dropout_mask[i];
      gw[i] = g * x;
      grad_emb[i] += w[i] * g;
    }
  }
  if (!trace.dropout_mask.empty()) {
    for (std::size_t i = 0; i < dim; ++i) grad_emb[i] *= trace.dropout_mask[i];
  }

  // Document level.
  const std::size_t n_sent = trace.doc_matrix.cols();
  if (cfg.document.layers.empty()) {
    r.doc_matrix_grad = Matrix(trace.doc_matrix.rows(), n_sent);
    for (std::size_t s = 0; s < n_sent; ++s) {
      for (std::size_t i = 0; i < dim; ++i) r.doc_matrix_grad(i, s) = grad_emb[i] / static_cast<double>(n_sent);
    }
  } else {
    const auto& last = trace.document.back().output;
    r.doc_matrix_grad = level_backward(unflatten_feature_major(grad_emb, last.rows(), last.cols()),
                                       trace.document, params.document_banks, r.params.document_banks);
  }

  // Sentence level, weights tied across sentences.
  r.word_grads.reserve(n_sent);
  for (std::size_t s = 0; s < n_sent; ++s) {
    const auto& traces = trace.sentences[s];
    const auto& last = traces.back().output;
    const std::vector<double> col = r.doc_matrix_grad.column(s);
    Matrix g = level_backward(unflatten_feature_major(col, last.rows(), last.cols()), traces,
                              params.sentence_banks, r.params.sentence_banks);
    const auto& ids = trace.token_ids[s];
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (ids[j] == Vocabulary::kPad) continue;
      auto [it, inserted] = r.params.embedding.try_emplace(ids[j], g.rows(), 0.0);
      for (std::size_t d = 0; d < g.rows(); ++d) it->second[d] += g(d, j);
    }
    r.word_grads.push_back(std::move(g));
  }
  return r;
}

BackwardResult backward(const DocForwardTrace& trace, std::size_t label, const ModelParams& params) {
  SoftmaxLoss sl = softmax_xent(trace.logits, label);
  BackwardResult r = backward_from_logits(trace, sl.grad_logits, params);
  r.loss = sl.loss;
  return r;
}

double document_loss(const Document& doc, std::size_t label, const ModelParams& params) {
  return softmax_xent(forward(doc, params).logits, label).loss;
}

// ---------------------------------------------------------------------------

std::vector<ParamBlock> parameter_blocks(ModelParams& params) {
  std::vector<ParamBlock> blocks;
  blocks.push_back({"embedding", params.embedding.values(), true});
  for (std::size_t l = 0; l < params.sentence_banks.size(); ++l) {
    blocks.push_back({"sentence" + std::to_string(l + 1) + ".weights", params.sentence_banks[l].weights(), true});
    blocks.push_back({"sentence" + std::to_string(l + 1) + ".bias", params.sentence_banks[l].bias(), false});
  }
  for (std::size_t l = 0; l < params.document_banks.size(); ++l) {
    blocks.push_back({"document" + std::to_string(l + 1) + ".weights", params.document_banks[l].weights(), true});
    blocks.push_back({"document" + std::to_string(l + 1) + ".bias", params.document_banks[l].bias(), false});
  }
  blocks.push_back({"head.weights", params.head_weights.values(), true});
  blocks.push_back({"head.bias", params.head_bias, false});
  return blocks;
}

std::vector<std::vector<double>> gradient_blocks(const ModelGradients& grads, const ModelParams& params) {
  auto vec = [](std::span<const double> s) { return std::vector<double>(s.begin(), s.end()); };
  std::vector<std::vector<double>> blocks;
  blocks.push_back(vec(grads.dense_embedding(params.embedding.rows(), params.embedding.cols()).values()));
  for (const auto& b : grads.sentence_banks) {
    blocks.push_back(vec(b.weights()));
    blocks.push_back(vec(b.bias()));
  }
  for (const auto& b : grads.document_banks) {
    blocks.push_back(vec(b.weights()));
    blocks.push_back(vec(b.bias()));
  }
  blocks.push_back(vec(grads.head_weights.values()));
  blocks.push_back(grads.head_bias);
  return blocks;
}

double l2_norm(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

}  // namespace docconv
