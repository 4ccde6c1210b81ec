#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "docconv/conv.hpp"
#include "docconv/kmax.hpp"
#include "docconv/matrix.hpp"
#include "docconv/text.hpp"

namespace docconv {

class Rng;

/// One convolution -> k-max pooling -> tanh stage.
struct LayerSpec {
  std::size_t width = 1;
  std::size_t maps = 1;
  PoolSpec pool;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// A stack of layers applied to one level (words of a sentence, or sentences
/// of a document). The last layer must use fixed-k pooling so the level
/// emits a fixed-size embedding.
struct LevelConfig {
  std::vector<LayerSpec> layers;

  friend bool operator==(const LevelConfig&, const LevelConfig&) = default;
};

struct ModelConfig {
  std::size_t embedding_dim = 10;
  std::size_t vocab_size = Vocabulary::kReserved;
  std::size_t classes = 2;
  LevelConfig sentence;
  // May be empty, in which case the document embedding is the mean of the
  // sentence embeddings (used for single-sentence corpora such as tweets).
  LevelConfig document;

  // Throws ConfigError naming the offending level and layer.
  void validate() const;

  // maps * k of the last sentence layer, flattened feature-map-major.
  std::size_t sentence_embedding_dim() const;
  std::size_t document_embedding_dim() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelParams {
  ModelConfig config;
  Matrix embedding;  // embedding_dim x vocab_size; column PAD stays zero
  std::vector<FilterBank> sentence_banks;
  std::vector<FilterBank> document_banks;
  Matrix head_weights;  // classes x document_embedding_dim
  std::vector<double> head_bias;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Shapes of every block agree with params.config.
void validate_params(const ModelParams& params);

// sqrt(6 / (fan_in + fan_out))
double glorot_bound(std::size_t fan_in, std::size_t fan_out);

/// Filter banks and head ~ U(-a, a) with a = glorot_bound(depth * width, maps)
/// (head: fan_in = embedding size, fan_out = classes); embeddings ~
/// U(-0.1, 0.1); biases and the PAD column zero. Deterministic in `seed`.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

struct LayerTrace {
  Matrix input;
  PoolSelection selection;
  Matrix pooled;  // before tanh
  Matrix output;  // after tanh
};

struct DocForwardTrace {
  std::vector<std::vector<TokenId>> token_ids;
  std::vector<std::vector<LayerTrace>> sentences;  // one trace stack per sentence
  std::vector<LayerTrace> document;
  Matrix doc_matrix;                   // sentence embeddings as columns, document order
  std::vector<double> doc_embedding;   // before dropout
  std::vector<double> dropout_mask;    // empty when dropout is off
  std::vector<double> logits;
  std::vector<double> probabilities;
  std::size_t predicted = 0;
};

/// Column j is the embedding of the j-th word.
Matrix build_sentence_matrix(std::span<const TokenId> ids, const Matrix& embedding);

/// Applies a level's layers; `sequence_length` drives dynamic-k layers.
std::vector<LayerTrace> level_forward(const Matrix& input, const std::vector<FilterBank>& banks,
                                      const LevelConfig& level, std::size_t sequence_length);

// Row-major flatten of a maps x k matrix: element (m, p) goes to m * k + p.
std::vector<double> flatten_feature_major(const Matrix& pooled);

struct SentenceEmbedding {
  std::vector<double> embedding;
  std::vector<LayerTrace> traces;
};

SentenceEmbedding sentence_forward(const Matrix& sentence_matrix, const ModelParams& params);

struct ForwardOptions {
  double dropout = 0.0;     // applied to the document embedding when > 0
  Rng* rng = nullptr;       // required when dropout > 0
};

/// Word -> sentence -> document -> softmax for one document.
DocForwardTrace forward(const Document& doc, const ModelParams& params,
                        const ForwardOptions& options = {});

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probabilities;
};

Prediction predict(const Document& doc, const ModelParams& params);

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

struct ModelGradients {
  // Sparse: only columns of words that occurred.
  std::map<TokenId, std::vector<double>> embedding;
  std::vector<FilterBank> sentence_banks;
  std::vector<FilterBank> document_banks;
  Matrix head_weights;
  std::vector<double> head_bias;

  static ModelGradients zeros_like(const ModelParams& params);
  void add(const ModelGradients& other);
  void scale(double factor);
  Matrix dense_embedding(std::size_t dim, std::size_t vocab_size) const;
};

struct BackwardResult {
  ModelGradients params;
  Matrix doc_matrix_grad;          // dL/d(sentence embedding columns)
  std::vector<Matrix> word_grads;  // dL/d(sentence matrix), one per sentence
  double loss = 0.0;
};

/// Backpropagates an arbitrary logit gradient through the whole model.
/// Gradients of the tied sentence-level weights are summed over sentences.
BackwardResult backward_from_logits(const DocForwardTrace& trace, std::span<const double> grad_logits,
                                    const ModelParams& params);

/// Cross-entropy backward pass for `label`.
BackwardResult backward(const DocForwardTrace& trace, std::size_t label, const ModelParams& params);

// Cross-entropy of `label` under an inference-mode forward pass.
double document_loss(const Document& doc, std::size_t label, const ModelParams& params);

// ---------------------------------------------------------------------------
// Flat views for gradient checking and norms
// ---------------------------------------------------------------------------

struct ParamBlock {
  std::string name;
  std::span<double> values;
  bool weight_decay = false;  // L2 applies (weights yes, biases no)
};

// Every trainable block of `params`, in serialization order.
std::vector<ParamBlock> parameter_blocks(ModelParams& params);

// Gradient blocks aligned with parameter_blocks(); the embedding is densified.
std::vector<std::vector<double>> gradient_blocks(const ModelGradients& grads, const ModelParams& params);

double l2_norm(std::span<const double> values);

}  // namespace docconv
