#pragma once

// Independent brute-force oracles shared by the test binaries.

#include <algorithm>
#include <numeric>
#include <vector>

#include "zn2mm/partitions.hpp"

namespace oracle {

namespace detail {
inline void strips(const std::vector<int>& mu, const std::vector<int>& old, std::vector<int>& cur, std::size_t row,
                   int left, std::vector<std::vector<int>>& out) {
  if (row == old.size()) {
    if (left == 0) out.push_back(cur);
    return;
  }
  const int upper = std::min(mu[row], row == 0 ? mu[0] : old[row - 1]);
  for (int v = old[row]; v <= upper && v - old[row] <= left; ++v) {
    cur[row] = v;
    strips(mu, old, cur, row + 1, left - (v - old[row]), out);
  }
  cur[row] = old[row];
}

inline long kostka_rec(const std::vector<int>& mu, const std::vector<int>& w, std::size_t letter,
                       const std::vector<int>& shape) {
  if (letter == w.size()) return shape == mu ? 1 : 0;
  std::vector<std::vector<int>> next;
  std::vector<int> cur = shape;
  strips(mu, shape, cur, 0, w[letter], next);
  long total = 0;
  for (const auto& s : next) total += kostka_rec(mu, w, letter + 1, s);
  return total;
}
}  // namespace detail

// Number of semistandard tableaux of shape mu with content w (a composition
// of nonnegative entries), as chains of horizontal strips.
inline long kostka(const zn2mm::Partition& mu, const std::vector<int>& w) {
  const std::size_t n = w.size();
  if (mu.length() > static_cast<int>(n)) return 0;
  for (int x : w)
    if (x < 0) return 0;
  if (std::accumulate(w.begin(), w.end(), 0) != mu.weight()) return 0;
  std::vector<int> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = mu.part(static_cast<int>(i) + 1);
  return detail::kostka_rec(target, w, 0, std::vector<int>(n, 0));
}

// c^alpha_{lambda mu} = sum_sigma sgn(sigma) K_{mu, alpha + delta - sigma(lambda + delta)}
// in n = max(l(alpha), l(lambda), 1) variables.
inline long lr_by_kostka(const zn2mm::Partition& lambda, const zn2mm::Partition& mu, const zn2mm::Partition& alpha) {
  if (alpha.weight() != lambda.weight() + mu.weight()) return 0;
  const int n = std::max({alpha.length(), lambda.length(), 1});
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  long total = 0;
  do {
    int inversions = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inversions;
    std::vector<int> w(n);
    for (int i = 0; i < n; ++i) {
      const int j = perm[i];
      w[i] = (alpha.part(i + 1) + (n - 1 - i)) - (lambda.part(j + 1) + (n - 1 - j));
    }
    const long k = kostka(mu, w);
    total += (inversions % 2 == 0) ? k : -k;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return total;
}

}  // namespace oracle
