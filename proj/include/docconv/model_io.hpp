#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "docconv/model.hpp"
#include "docconv/text.hpp"

namespace docconv {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// A trained network together with the vocabulary its embedding columns
/// are indexed by.
struct SavedModel {
  ModelParams params;
  Vocabulary vocabulary;
};

/// Model file, all integers and doubles little-endian:
///
///   magic "DCMODEL1"
///   u32 format version
///   u64 vocabulary hash
///   u32 embedding_dim, u32 vocab_size, u32 classes
///   u32 sentence layer count, then per layer: u32 width, u32 maps,
///       u8 pool mode (0 fixed, 1 dynamic), u32 k_top, f64 fraction
///   u32 document layer count, then layers as above
///   u32 token count, then tokens (u32 length + bytes) in id order
///   f64 blocks: embedding (row-major d x |V|), each sentence bank
///       (weights [channel][tap][map], then bias), each document bank,
///       head weights (row-major classes x D), head bias
void save_model(const ModelParams& params, const Vocabulary& vocab, const std::filesystem::path& path);

/// Refuses files with an unknown version, a corrupt vocabulary, or, when
/// `expected_vocab_hash` is set, a vocabulary other than the expected one.
SavedModel load_model(const std::filesystem::path& path,
                      std::optional<std::uint64_t> expected_vocab_hash = std::nullopt);

// FNV-1a over the file's bytes.
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace docconv
