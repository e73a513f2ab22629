#pragma once

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "partitions.hpp"
#include "schur.hpp"

namespace zn2mm {

namespace detail {

// Counts LR tableaux of skew shape alpha/lambda with content mu: semistandard
// fillings whose reverse reading word (rows top to bottom, each right to left)
// is a lattice word.
class LRTableauCounter {
 public:
  LRTableauCounter(const Partition& lambda, const Partition& mu, const Partition& alpha)
      : lambda_(lambda), mu_(mu), alpha_(alpha) {
    rows_ = alpha.length();
    filling_.resize(rows_);
    for (int i = 1; i <= rows_; ++i) filling_[i - 1].assign(alpha.part(i) + 1, 0);
    used_.assign(mu.length() + 2, 0);
  }

  long count() { return fill(1, alpha_.part(1)); }

 private:
  long fill(int row, int col) {
    if (row > rows_) return 1;
    if (col <= lambda_.part(row)) {
      // Row finished; every letter must be used by the end.
      if (row == rows_) {
        for (int v = 1; v <= mu_.length(); ++v)
          if (used_[v] != mu_.part(v)) return 0;
        return 1;
      }
      return fill(row + 1, alpha_.part(row + 1));
    }
    // Weakly increasing along the row: the cell to the right bounds us above.
    int hi = (col < alpha_.part(row)) ? filling_[row - 1][col + 1] : mu_.length();
    hi = std::min(hi, row);
    int lo = 1;
    if (row > 1 && col > lambda_.part(row - 1)) lo = filling_[row - 2][col] + 1;
    long total = 0;
    for (int v = lo; v <= hi; ++v) {
      if (used_[v] >= mu_.part(v)) continue;
      if (v > 1 && used_[v] + 1 > used_[v - 1]) continue;
      ++used_[v];
      filling_[row - 1][col] = v;
      total += fill(row, col - 1);
      filling_[row - 1][col] = 0;
      --used_[v];
    }
    return total;
  }

  const Partition& lambda_;
  const Partition& mu_;
  const Partition& alpha_;
  int rows_ = 0;
  std::vector<std::vector<int>> filling_;
  std::vector<int> used_;
};

class LRCache {
 public:
  static LRCache& instance() {
    static LRCache cache;
    return cache;
  }

  long get(const Partition& lambda, const Partition& mu, const Partition& alpha) {
    const auto key = std::make_tuple(lambda, mu, alpha);
    {
      std::lock_guard lock(mutex_);
      if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    const long value = LRTableauCounter(lambda, mu, alpha).count();
    std::lock_guard lock(mutex_);
    table_.emplace(key, value);
    return value;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<Partition, Partition, Partition>, long> table_;
};

}  // namespace detail

/// Littlewood-Richardson coefficient c^alpha_{lambda mu} (multiplicity of
/// s_alpha in s_lambda s_mu), memoized across calls.
inline long lr_coefficient(const Partition& lambda, const Partition& mu, const Partition& alpha) {
  if (alpha.weight() != lambda.weight() + mu.weight()) return 0;
  if (!alpha.contains(lambda) || !alpha.contains(mu)) return 0;
  if (mu.empty() || lambda.empty()) return 1;
  return detail::LRCache::instance().get(lambda, mu, alpha);
}

/// s_lambda s_mu = sum_alpha c^alpha_{lambda mu} s_alpha.
inline std::map<Partition, long> schur_product(const Partition& lambda, const Partition& mu) {
  std::map<Partition, long> out;
  const int w = lambda.weight() + mu.weight();
  for_each_partition_of(w, lambda.length() + mu.length(), [&](const Partition& alpha) {
    if (alpha.part(1) > lambda.part(1) + mu.part(1)) return;
    const long c = lr_coefficient(lambda, mu, alpha);
    if (c != 0) out.emplace(alpha, c);
  });
  return out;
}

/// Arity-1 SchurSeries form of schur_product.
template <typename T = Rational>
SchurSeries<T> schur_product_series(const Partition& lambda, const Partition& mu) {
  SchurSeries<T> s;
  s.arity = 1;
  s.max_weight = lambda.weight() + mu.weight();
  for (const auto& [alpha, c] : schur_product(lambda, mu)) s.add({alpha}, from_int<T>(c));
  return s;
}

}  // namespace zn2mm
