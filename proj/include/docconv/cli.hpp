#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "docconv/config.hpp"
#include "docconv/text.hpp"

namespace docconv {

/// Exit codes: 0 success, 1 user or configuration error, 2 internal failure
/// (including a gradient check above tolerance).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUser = 1;
inline constexpr int kExitInternal = 2;

/// Entry point behind the `docconv` executable. `args` excludes the program
/// name. Results go to `out`, logs and heartbeat lines to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string usage();

struct LoadedData {
  RawCorpus train;
  std::optional<RawCorpus> test;
  // Set when the dataset is an already encoded corpus.
  std::optional<Corpus> encoded_train;
  std::optional<Corpus> encoded_test;
};

// Throws DataError naming the missing path.
LoadedData load_dataset(const DatasetConfig& dataset);

/// Root for run directories: $DOCCONV_OUTPUT_ROOT when set, otherwise the
/// configured directory.
std::filesystem::path output_root(const RunConfig& config);

/// Exclusive ownership of a run directory through a `.lock` file created
/// with O_EXCL semantics; released on destruction.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& directory);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace docconv
