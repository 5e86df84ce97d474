#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace brute {

// all perfect matchings of J via permutations, canonicalized and deduplicated
inline std::set<std::vector<std::pair<int, int>>> matchings(const std::vector<int>& J) {
  std::set<std::vector<std::pair<int, int>>> out;
  if (J.size() % 2) return out;
  std::vector<int> p = J;
  std::sort(p.begin(), p.end());
  do {
    std::vector<std::pair<int, int>> m;
    for (std::size_t i = 0; i < p.size(); i += 2) m.push_back({std::min(p[i], p[i + 1]), std::max(p[i], p[i + 1])});
    std::sort(m.begin(), m.end());
    out.insert(m);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline bool admissible(const std::vector<std::pair<int, int>>& m, const std::string& cls, int N) {
  for (auto [a, b] : m) {
    bool consecutive = a % 2 == 1 && b == a + 1;
    bool block = (a - 1) / N == (b - 1) / N;
    if (cls == "P2" && consecutive) return false;
    if (cls == "PN" && (consecutive || block)) return false;
    if (cls == "PN-block" && block) return false;
  }
  return true;
}

}  // namespace brute
