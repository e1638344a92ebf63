#pragma once

// Random GQL-mini ASTs whose names exercise quoting and escapes.

#include <random>
#include <string>

#include "cgraph/query.hpp"

namespace cgraph::testing {

inline std::string random_name(std::mt19937_64& rng) {
  static const std::string alphabet = "ab \"\\-;>\nZ\t'";
  std::string s;
  const auto len = 1 + rng() % 8;
  for (std::size_t i = 0; i < len; ++i) s.push_back(alphabet[rng() % alphabet.size()]);
  return s;
}

inline GraphQuery random_query(std::mt19937_64& rng) {
  const auto bound = [&] { return rng() % 4 == 0 ? kMaxQueryBound : 1 + rng() % 50; };
  switch (rng() % 4) {
    case 0: return Reachable{random_name(rng), random_name(rng)};
    case 1: return ShortestPath{random_name(rng), random_name(rng)};
    case 2: return Prerequisites{random_name(rng), bound()};
    default: return Neighbors{random_name(rng), rng() % 2 ? Direction::In : Direction::Out, bound()};
  }
}

}  // namespace cgraph::testing
