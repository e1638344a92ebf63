#include "cgraph/text.hpp"

#include <algorithm>

namespace cgraph {

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

}  // namespace

std::string normalize_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (unsigned char c : name) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(lower(c));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word(c)) {
      current.push_back(lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t word_count(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && is_space(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      return parts;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_interval(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

VocabularyMatcher::VocabularyMatcher(const std::vector<std::string>& vocabulary)
    : vocabulary_(vocabulary) {
  nodes_.emplace_back();
  for (std::size_t entry = 0; entry < vocabulary_.size(); ++entry) {
    const auto tokens = tokenize(vocabulary_[entry]);
    if (tokens.empty()) continue;
    std::size_t node = 0;
    for (const auto& token : tokens) {
      std::size_t next = child(node, token);
      if (next == npos) {
        next = nodes_.size();
        nodes_.emplace_back();
        auto& kids = nodes_[node].children;
        const auto at = std::lower_bound(
            kids.begin(), kids.end(), token,
            [](const auto& kid, const std::string& t) { return kid.first < t; });
        kids.insert(at, {token, next});
      }
      node = next;
    }
    if (nodes_[node].entry == npos) nodes_[node].entry = entry;
  }
}

std::size_t VocabularyMatcher::child(std::size_t node, const std::string& token) const {
  const auto& kids = nodes_[node].children;
  const auto at = std::lower_bound(
      kids.begin(), kids.end(), token,
      [](const auto& kid, const std::string& t) { return kid.first < t; });
  if (at == kids.end() || at->first != token) return npos;
  return at->second;
}

std::vector<Mention> VocabularyMatcher::scan(std::string_view text) const {
  const auto tokens = tokenize(text);
  std::vector<Mention> mentions;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t node = 0;
    std::size_t best_entry = npos;
    std::size_t best_len = 0;
    for (std::size_t j = i; j < tokens.size(); ++j) {
      node = child(node, tokens[j]);
      if (node == npos) break;
      if (nodes_[node].entry != npos) {
        best_entry = nodes_[node].entry;
        best_len = j - i + 1;
      }
    }
    if (best_entry == npos) {
      ++i;
      continue;
    }
    mentions.push_back({best_entry, i, best_len});
    i += best_len;
  }
  return mentions;
}

}  // namespace cgraph
