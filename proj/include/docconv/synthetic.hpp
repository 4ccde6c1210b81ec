#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "docconv/text.hpp"

namespace docconv {

/// Reviews whose label is decided only by planted sentences that carry a
/// polarity word. Every other sentence is neutral filler drawn from a pool
/// shared by both classes.
///
/// A document gets `a` planted sentences of its own polarity, a in
/// [min_planted, max_planted]. With probability `mixed_fraction` it also gets
/// b in [1, a) of the opposite polarity; the label is the majority. Mixed
/// documents stop a classifier from reading the absence of one polarity as
/// the other. With `cluster_span` > 0 all planted sentences fall inside one run of
/// that many consecutive sentences.
struct SyntheticOptions {
  std::size_t documents = 200;
  std::size_t min_sentences = 8;
  std::size_t max_sentences = 10;
  std::size_t min_planted = 2;
  std::size_t max_planted = 3;
  double mixed_fraction = 0.0;
  std::size_t cluster_span = 0;
  // Draw filler from the first this many neutral words; 0 uses all of them.
  std::size_t filler_vocabulary = 0;
  std::size_t min_words = 5;
  std::size_t max_words = 9;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticCorpus {
  RawCorpus raw;
  // Per document, the sorted indices of sentences carrying either polarity.
  std::vector<std::vector<std::size_t>> planted;
};

// Labels alternate 0, 1, 0, ... so the classes stay balanced.
SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options);

const std::vector<std::string>& positive_words();
const std::vector<std::string>& negative_words();
const std::vector<std::string>& neutral_words();

}  // namespace docconv
