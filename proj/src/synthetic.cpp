#include "docconv/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "docconv/errors.hpp"
#include "docconv/random.hpp"

namespace docconv {

namespace {

// `words` neutral tokens with each of `polar` written over a distinct position.
std::string make_sentence(Rng& rng, std::size_t words, std::size_t filler,
                          const std::vector<const std::string*>& polar) {
  std::vector<std::string> tokens;
  const auto& pool = neutral_words();
  for (std::size_t i = 0; i < words; ++i) tokens.push_back(pool[rng.below(filler)]);
  std::vector<std::size_t> slots(words);
  for (std::size_t i = 0; i < words; ++i) slots[i] = i;
  rng.shuffle(slots);
  for (std::size_t i = 0; i < polar.size(); ++i) tokens[slots[i]] = *polar[i];
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out + ".";
}

const std::string* pick(Rng& rng, const std::vector<std::string>& words) { return &words[rng.below(words.size())]; }

}  // namespace

const std::vector<std::string>& neutral_words() {
  static const std::vector<std::string> words = {
      "the",      "film",    "movie",   "story",  "plot",     "actor",   "actress", "scene",   "camera",
      "director", "script",  "music",   "score",  "cast",     "ending",  "opening", "hour",    "minute",
      "character", "role",   "dialogue", "set",   "costume",  "studio",  "sequel",  "version", "theater",
      "audience", "critic",  "screen",  "was",    "is",       "had",     "has",     "with",    "about",
      "and",      "of",      "in",      "on",     "a",        "this",    "that",    "it",      "some",
      "long",     "short",   "first",   "second", "last",     "old",     "new",     "young",   "main",
      "city",     "night",   "family",  "friend", "house",    "war",     "town",    "summer",  "year"};
  return words;
}

const std::vector<std::string>& positive_words() {
  static const std::vector<std::string> words = {"excellent", "wonderful", "superb", "brilliant", "masterpiece"};
  return words;
}

const std::vector<std::string>& negative_words() {
  static const std::vector<std::string> words = {"awful", "terrible", "dreadful", "boring", "worst"};
  return words;
}

void SyntheticOptions::validate() const {
  if (documents == 0) throw ConfigError("synthetic corpus needs at least one document");
  if (min_sentences == 0 || min_sentences > max_sentences) {
    throw ConfigError("synthetic sentence range is empty");
  }
  if (min_planted == 0 || min_planted > max_planted) throw ConfigError("synthetic planted range is empty");
  if (!(mixed_fraction >= 0.0 && mixed_fraction <= 1.0)) throw ConfigError("synthetic mixed fraction must lie in [0, 1]");
  if (mixed_fraction > 0.0 && max_planted < 2) throw ConfigError("mixed synthetic documents need max_planted >= 2");
  const std::size_t most = mixed_fraction > 0.0 ? 2 * max_planted - 1 : max_planted;
  if (most > min_sentences || (cluster_span > 0 && (most > cluster_span || cluster_span > min_sentences))) {
    throw ConfigError("synthetic documents cannot hold " + std::to_string(most) + " planted sentences (" +
                      std::to_string(min_sentences) + " sentences, cluster span " + std::to_string(cluster_span) +
                      ")");
  }
  if (min_words == 0 || min_words > max_words) throw ConfigError("synthetic word range is empty");
  if (filler_vocabulary > neutral_words().size()) {
    throw ConfigError("synthetic filler vocabulary must not exceed " + std::to_string(neutral_words().size()));
  }
}

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options) {
  options.validate();
  Rng rng(options.seed);
  const std::size_t filler = options.filler_vocabulary > 0 ? options.filler_vocabulary : neutral_words().size();
  SyntheticCorpus out;
  out.raw.class_count = 2;
  out.raw.sentence_split = true;
  for (std::size_t d = 0; d < options.documents; ++d) {
    const std::size_t label = d % 2;
    const auto& own = label == 1 ? positive_words() : negative_words();
    const auto& other = label == 1 ? negative_words() : positive_words();
    const std::size_t n =
        options.min_sentences + rng.below(options.max_sentences - options.min_sentences + 1);
    const std::size_t a = options.min_planted + rng.below(options.max_planted - options.min_planted + 1);
    const bool mixed = a >= 2 && rng.uniform() < options.mixed_fraction;
    const std::size_t b = mixed ? 1 + rng.below(a - 1) : 0;

    const std::size_t span = options.cluster_span > 0 ? options.cluster_span : n;
    const std::size_t offset = rng.below(n - span + 1);
    std::vector<std::size_t> slots(span);
    for (std::size_t i = 0; i < span; ++i) slots[i] = offset + i;
    rng.shuffle(slots);
    // slots[0, a) carry the document's polarity, slots[a, a + b) the opposite.
    std::vector<const std::vector<std::string>*> pool_of(n, nullptr);
    for (std::size_t i = 0; i < a + b; ++i) pool_of[slots[i]] = i < a ? &own : &other;
    std::vector<std::size_t> planted(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(a + b));
    std::sort(planted.begin(), planted.end());

    std::string text;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t words = options.min_words + rng.below(options.max_words - options.min_words + 1);
      std::vector<const std::string*> polar;
      if (pool_of[s]) polar = {pick(rng, *pool_of[s])};
      if (!text.empty()) text.push_back(' ');
      text += make_sentence(rng, words, filler, polar);
    }
    out.raw.documents.push_back(RawDocument{"synthetic-" + std::to_string(d), std::move(text), label});
    out.planted.push_back(std::move(planted));
  }
  return out;
}

}  // namespace docconv
