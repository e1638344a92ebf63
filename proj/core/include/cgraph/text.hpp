#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cgraph {

/// Lowercases ASCII letters, trims, and collapses internal whitespace runs to
/// one space. Used as the lookup key for concept names.
std::string normalize_name(std::string_view name);

/// Lowercase alphanumeric runs. Bytes >= 0x80 count as word characters so
/// UTF-8 text is kept intact.
std::vector<std::string> tokenize(std::string_view text);

/// Number of whitespace-separated tokens.
std::size_t word_count(std::string_view text);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Stable 64-bit FNV-1a; identical across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

/// splitmix64 finalizer; turns correlated inputs into well-mixed words.
std::uint64_t mix64(std::uint64_t x);

/// Maps a 64-bit word to [0, 1) using its top 53 bits.
double unit_interval(std::uint64_t word);

struct Mention {
  std::size_t entry;        // index into the matcher's vocabulary
  std::size_t first_token;  // token offset in the scanned text
  std::size_t token_count;
};

/// Longest-match, non-overlapping vocabulary scanner over `tokenize` output.
/// Entries whose token sequences coincide resolve to the first one added.
class VocabularyMatcher {
 public:
  explicit VocabularyMatcher(const std::vector<std::string>& vocabulary);

  std::vector<Mention> scan(std::string_view text) const;

  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }

 private:
  struct Node {
    std::vector<std::pair<std::string, std::size_t>> children;  // sorted by token
    std::size_t entry = npos;
  };
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t child(std::size_t node, const std::string& token) const;

  std::vector<std::string> vocabulary_;
  std::vector<Node> nodes_;
};

}  // namespace cgraph
