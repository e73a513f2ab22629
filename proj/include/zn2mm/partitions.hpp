#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace zn2mm {

/// Integer partition stored as its nonzero parts in weakly decreasing order.
/// Equality and ordering are structural, so partitions work as map keys.
class Partition {
 public:
  Partition() = default;

  /// Accepts trailing zeros; rejects negative or increasing parts.
  explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
    while (!parts_.empty() && parts_.back() == 0) parts_.pop_back();
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (parts_[i] <= 0) fail(ErrorCode::InvalidArgument, "partition parts must be positive");
      if (i > 0 && parts_[i] > parts_[i - 1])
        fail(ErrorCode::InvalidArgument, "partition parts must be weakly decreasing");
    }
  }
  Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

  const std::vector<int>& parts() const { return parts_; }
  int length() const { return static_cast<int>(parts_.size()); }
  int weight() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }
  bool empty() const { return parts_.empty(); }

  /// 1-based part; zero beyond the length.
  int part(int i) const { return (i >= 1 && i <= length()) ? parts_[i - 1] : 0; }

  Partition conjugate() const {
    std::vector<int> cols;
    if (!parts_.empty()) {
      cols.assign(parts_.front(), 0);
      for (int p : parts_)
        for (int j = 0; j < p; ++j) ++cols[j];
    }
    return Partition(std::move(cols));
  }

  /// Number of diagonal nodes, i.e. the number of i with part(i) >= i.
  int durfee() const {
    int k = 0;
    while (k < length() && parts_[k] >= k + 1) ++k;
    return k;
  }

  bool contains(const Partition& other) const {
    if (other.length() > length()) return false;
    for (int i = 1; i <= other.length(); ++i)
      if (other.part(i) > part(i)) return false;
    return true;
  }

  friend auto operator<=>(const Partition&, const Partition&) = default;
  friend bool operator==(const Partition&, const Partition&) = default;

  /// "3+1" style text; the empty partition prints as "()".
  std::string str() const {
    if (parts_.empty()) return "()";
    std::ostringstream os;
    for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? "+" : "") << parts_[i];
    return os.str();
  }

  static Partition parse(std::string_view text) {
    if (text == "()" || text.empty() || text == "0") return Partition();
    std::vector<int> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t next = text.find('+', pos);
      const std::string_view tok = text.substr(pos, next == std::string_view::npos ? text.size() - pos : next - pos);
      if (tok.empty()) fail(ErrorCode::InvalidArgument, "malformed partition text");
      int v = 0;
      for (char c : tok) {
        if (c < '0' || c > '9') fail(ErrorCode::InvalidArgument, "malformed partition text");
        v = v * 10 + (c - '0');
      }
      parts.push_back(v);
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    return Partition(std::move(parts));
  }

 private:
  std::vector<int> parts_;
};

inline std::ostream& operator<<(std::ostream& os, const Partition& p) { return os << p.str(); }

/// Frobenius coordinates (alpha | beta): arm and leg lengths of the diagonal nodes.
struct FrobeniusCoords {
  std::vector<int> alphas;
  std::vector<int> betas;

  friend bool operator==(const FrobeniusCoords&, const FrobeniusCoords&) = default;
};

inline FrobeniusCoords frobenius(const Partition& lambda) {
  const Partition tr = lambda.conjugate();
  FrobeniusCoords f;
  for (int j = 1; j <= lambda.durfee(); ++j) {
    f.alphas.push_back(lambda.part(j) - j);
    f.betas.push_back(tr.part(j) - j);
  }
  return f;
}

inline Partition from_frobenius(const FrobeniusCoords& f) {
  const std::size_t k = f.alphas.size();
  if (f.betas.size() != k) fail(ErrorCode::InvalidArgument, "Frobenius arms and legs differ in count");
  for (std::size_t i = 0; i < k; ++i) {
    if (f.alphas[i] < 0 || f.betas[i] < 0) fail(ErrorCode::InvalidArgument, "negative Frobenius coordinate");
    if (i > 0 && (f.alphas[i] >= f.alphas[i - 1] || f.betas[i] >= f.betas[i - 1]))
      fail(ErrorCode::InvalidArgument, "Frobenius coordinates must strictly decrease");
  }
  if (k == 0) return Partition();
  // Row i (1-based): i <= k has arm alpha_i past the diagonal; rows below the
  // Durfee square are read off the legs.
  const int rows = f.betas[0] + 1;
  std::vector<int> parts(rows, 0);
  for (std::size_t i = 0; i < k; ++i) parts[i] = f.alphas[i] + static_cast<int>(i) + 1;
  for (int r = static_cast<int>(k) + 1; r <= rows; ++r) {
    int c = 0;
    for (std::size_t j = 0; j < k; ++j)
      if (f.betas[j] + static_cast<int>(j) + 1 >= r) ++c;
    parts[r - 1] = c;
  }
  return Partition(std::move(parts));
}

/// h_i = lambda_i - i + N for i = 1..N, strictly decreasing with h_N >= 0.
inline std::vector<int> shifted_labels(const Partition& lambda, int N) {
  if (N < 0 || lambda.length() > N)
    fail(ErrorCode::LengthExceedsN, "length " + std::to_string(lambda.length()) + " exceeds N = " + std::to_string(N));
  std::vector<int> h(N);
  for (int i = 1; i <= N; ++i) h[i - 1] = lambda.part(i) - i + N;
  return h;
}

/// Inverse of shifted_labels for a strictly decreasing non-negative label set.
inline Partition from_shifted_labels(const std::vector<int>& h) {
  const int N = static_cast<int>(h.size());
  std::vector<int> parts(N);
  for (int i = 1; i <= N; ++i) {
    parts[i - 1] = h[i - 1] + i - N;
    if (i > 1 && h[i - 1] >= h[i - 2]) fail(ErrorCode::InvalidArgument, "labels must strictly decrease");
  }
  if (N > 0 && h.back() < 0) fail(ErrorCode::InvalidArgument, "labels must be non-negative");
  return Partition(std::move(parts));
}

/// nu~_i = nu_1 - nu_{N-i+1}: the complement of nu in the N x nu_1 rectangle, rotated.
/// Applying it twice subtracts nu_N from every part, so it is an involution
/// exactly on partitions of length < N.
inline Partition tilde_transform(const Partition& nu, int N) {
  if (N < 0 || nu.length() > N) fail(ErrorCode::LengthExceedsN, "tilde transform needs length <= N");
  std::vector<int> parts(N);
  for (int i = 1; i <= N; ++i) parts[i - 1] = nu.part(1) - nu.part(N - i + 1);
  return Partition(std::move(parts));
}

namespace detail {
inline void partitions_of(int remaining, int max_part, int max_length, std::vector<int>& current,
                          const std::function<void(const Partition&)>& emit) {
  if (remaining == 0) {
    emit(Partition(current));
    return;
  }
  if (static_cast<int>(current.size()) == max_length) return;
  for (int p = std::min(remaining, max_part); p >= 1; --p) {
    current.push_back(p);
    partitions_of(remaining - p, p, max_length, current, emit);
    current.pop_back();
  }
}
}  // namespace detail

/// Calls emit for every partition of exactly `weight` with at most max_length
/// parts, lexicographically descending.
inline void for_each_partition_of(int weight, int max_length, const std::function<void(const Partition&)>& emit) {
  std::vector<int> current;
  detail::partitions_of(weight, weight, max_length, current, emit);
}

/// All partitions with weight <= max_weight and length <= max_length; graded by
/// weight, lexicographically descending within each weight.
inline std::vector<Partition> enumerate_partitions(int max_weight, int max_length) {
  std::vector<Partition> out;
  for (int w = 0; w <= max_weight; ++w)
    for_each_partition_of(w, max_length, [&](const Partition& p) { out.push_back(p); });
  return out;
}

}  // namespace zn2mm
