#pragma once

#include <algorithm>
#include <array>
#include <cstdlib>
#include <compare>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"
#include "partitions.hpp"
#include "polynomial.hpp"
#include "scalar.hpp"
#include "schur.hpp"

namespace zn2mm::fermion {

// Conventions.
//
// f_k creates mode k and fbar_k annihilates it; the vacuum |0> fills every
// mode k < 0. A basis state is the wedge s_1 ^ s_2 ^ ... of its occupied modes
// in strictly decreasing order, so f_k and fbar_k act with the sign
// (-1)^{#occupied modes above k}. Bras are handled as vectors of the same
// basis: <S| f_k acts like fbar_k on S and <S| fbar_k like f_k.

/// Basis state of the Fock space: charge N plus a finite excitation of the
/// charge-N sea Z_{<N}. `added` are occupied modes >= N and `removed` empty
/// modes < N, both sorted decreasing, equal in number.
class MayaState {
 public:
  MayaState() = default;

  static MayaState vacuum(int charge) {
    MayaState s;
    s.charge_ = charge;
    return s;
  }

  /// |N; lambda>: occupied modes lambda_i - i + N.
  static MayaState from_partition(int charge, const Partition& lambda) {
    std::vector<int> occupied;
    const int l = lambda.length();
    for (int i = 1; i <= l; ++i) occupied.push_back(lambda.part(i) - i + charge);
    return from_window(charge, charge - l, occupied);
  }

  int charge() const { return charge_; }
  const std::vector<int>& added() const { return added_; }
  const std::vector<int>& removed() const { return removed_; }

  bool occupied(int k) const {
    if (k < charge_) return !std::binary_search(removed_.rbegin(), removed_.rend(), k);
    return std::binary_search(added_.rbegin(), added_.rend(), k);
  }

  /// Number of occupied modes strictly above k.
  int count_above(int k) const {
    int c = 0;
    for (int a : added_)
      if (a > k) ++c;
    if (k < charge_ - 1) {
      c += charge_ - 1 - k;
      for (int r : removed_)
        if (r > k) --c;
    }
    return c;
  }

  /// Modes outside [lo, hi) agree with the sea of the current charge.
  int window_lo() const { return removed_.empty() ? charge_ : std::min(charge_, removed_.back()); }
  int window_hi() const { return added_.empty() ? charge_ : std::max(charge_, added_.front() + 1); }

  /// Partition read off the occupied modes: lambda_i = s_i + i - N.
  Partition to_partition() const {
    std::vector<int> parts;
    int i = 1;
    for (int k = window_hi() - 1; k >= window_lo(); --k) {
      if (!occupied(k)) continue;
      parts.push_back(k + i - charge_);
      ++i;
    }
    return Partition(std::move(parts));
  }

  /// State with mode k toggled (caller guarantees the occupation change is allowed).
  MayaState toggled(int k) const {
    const bool was = occupied(k);
    const int new_charge = charge_ + (was ? -1 : 1);
    const int lo = std::min({window_lo(), k, new_charge});
    const int hi = std::max({window_hi(), k + 1, new_charge});
    std::vector<int> occ;
    for (int j = hi - 1; j >= lo; --j) {
      const bool o = (j == k) ? !was : occupied(j);
      if (o) occ.push_back(j);
    }
    return from_window(new_charge, lo, occ);
  }

  friend auto operator<=>(const MayaState&, const MayaState&) = default;
  friend bool operator==(const MayaState&, const MayaState&) = default;

  std::string str() const { return "|" + std::to_string(charge_) + ";" + to_partition().str() + ">"; }

 private:
  // occupied: every occupied mode >= lo, decreasing; modes below lo are filled.
  static MayaState from_window(int charge, int lo, const std::vector<int>& occupied) {
    MayaState s;
    s.charge_ = charge;
    for (int j : occupied)
      if (j >= charge) s.added_.push_back(j);
    for (int j = charge - 1; j >= lo; --j)
      if (!std::binary_search(occupied.rbegin(), occupied.rend(), j)) s.removed_.push_back(j);
    if (s.added_.size() != s.removed_.size())
      fail(ErrorCode::InvalidArgument, "inconsistent Maya diagram for charge " + std::to_string(charge));
    return s;
  }

  int charge_ = 0;
  std::vector<int> added_;
  std::vector<int> removed_;
};

/// One- or two-component reading of the same mode lattice.
enum class Layout { OneComponent, TwoComponent };

/// f^{(alpha)}_n = f_{2n + alpha - 1}.
inline int two_component_embed(int alpha, int n) {
  if (alpha != 1 && alpha != 2) fail(ErrorCode::InvalidArgument, "component must be 1 or 2");
  return 2 * n + alpha - 1;
}

struct ComponentMode {
  int component;  // 0 for the one-component layout, otherwise 1 or 2
  int local;
};

inline ComponentMode split_mode(Layout layout, int k) {
  if (layout == Layout::OneComponent) return {0, k};
  const int alpha = ((k % 2) + 2) % 2 + 1;
  return {alpha, (k - (alpha - 1)) / 2};
}

/// Twice the energy contributed by toggling component-local mode n on:
/// adding mode n changes 2E by exactly 2n + 1.
inline int doubled_energy_shift(int local) { return 2 * local + 1; }

/// Twice the energy of each component: particles at local n >= 0 count 2n+1,
/// holes at local n < 0 count -2n-1. Index 0 is the one-component energy.
inline std::array<int, 3> doubled_energies(const MayaState& s, Layout layout) {
  std::array<int, 3> e{0, 0, 0};
  const int lo = std::min(0, s.window_lo());
  const int hi = std::max(0, s.window_hi());
  for (int k = lo; k < hi; ++k) {
    const bool occ = s.occupied(k);
    const auto cm = split_mode(layout, k);
    if (cm.local >= 0 && occ) e[cm.component] += 2 * cm.local + 1;
    if (cm.local < 0 && !occ) e[cm.component] += -2 * cm.local - 1;
  }
  return e;
}

/// Finite linear combination of basis states with exact coefficients.
template <typename C = Polynomial>
class FockVector {
 public:
  using Terms = std::map<MayaState, C>;

  FockVector() = default;
  static FockVector basis(const MayaState& s, C coeff = one<C>()) {
    FockVector v;
    v.add(s, coeff);
    return v;
  }
  static FockVector vacuum(int charge = 0) { return basis(MayaState::vacuum(charge)); }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  C coefficient(const MayaState& s) const {
    auto it = terms_.find(s);
    return it == terms_.end() ? zero<C>() : it->second;
  }

  void add(const MayaState& s, const C& c) {
    if (scalar_traits<C>::is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(s, c);
    if (!inserted) {
      it->second = it->second + c;
      if (scalar_traits<C>::is_zero(it->second)) terms_.erase(it);
    }
  }

  FockVector& operator+=(const FockVector& o) {
    for (const auto& [s, c] : o.terms_) add(s, c);
    return *this;
  }
  FockVector& operator-=(const FockVector& o) {
    for (const auto& [s, c] : o.terms_) add(s, -c);
    return *this;
  }
  friend FockVector operator+(FockVector a, const FockVector& b) { return a += b; }
  friend FockVector operator-(FockVector a, const FockVector& b) { return a -= b; }
  friend bool operator==(const FockVector& a, const FockVector& b) { return a.terms_ == b.terms_; }

  FockVector scaled(const C& s) const {
    FockVector r;
    for (const auto& [st, c] : terms_) r.add(st, c * s);
    return r;
  }

  /// f_k |v>.
  FockVector apply_f(int k) const { return toggle(k, false); }
  /// fbar_k |v>.
  FockVector apply_fbar(int k) const { return toggle(k, true); }
  /// <v| f_k, as a bra.
  FockVector bra_f(int k) const { return toggle(k, true); }
  /// <v| fbar_k, as a bra.
  FockVector bra_fbar(int k) const { return toggle(k, false); }

  /// sum_{j = offset mod stride} f_j fbar_{j + shift} applied to the ket.
  FockVector apply_bilinear(int stride, int offset, int shift) const {
    FockVector r;
    for (const auto& [s, c] : terms_) {
      const int lo = s.window_lo() - std::abs(shift) - stride;
      const int hi = s.window_hi() + std::abs(shift) + stride;
      for (int j = first_in_class(lo, stride, offset); j < hi; j += stride) {
        const int from = j + shift;
        if (!s.occupied(from) || (j != from && s.occupied(j))) continue;
        const int sign1 = s.count_above(from);
        const MayaState mid = s.toggled(from);
        if (mid.occupied(j)) continue;
        const int sign2 = mid.count_above(j);
        const MayaState out = mid.toggled(j);
        r.add(out, ((sign1 + sign2) % 2 == 0) ? c : C(-c));
      }
    }
    return r;
  }

  /// <v| sum_{j} f_j fbar_{j + shift}: the bra applies f_j first.
  FockVector bra_apply_bilinear(int stride, int offset, int shift) const {
    FockVector r;
    for (const auto& [s, c] : terms_) {
      const int lo = s.window_lo() - std::abs(shift) - stride;
      const int hi = s.window_hi() + std::abs(shift) + stride;
      for (int j = first_in_class(lo, stride, offset); j < hi; j += stride) {
        const int to = j + shift;
        if (!s.occupied(j)) continue;
        const int sign1 = s.count_above(j);
        const MayaState mid = s.toggled(j);
        if (mid.occupied(to)) continue;
        const int sign2 = mid.count_above(to);
        r.add(mid.toggled(to), ((sign1 + sign2) % 2 == 0) ? c : C(-c));
      }
    }
    return r;
  }

  /// Pairing <bra|ket> in the orthonormal wedge basis.
  friend C pair(const FockVector& bra, const FockVector& ket) {
    C acc = zero<C>();
    const auto& small = bra.size() <= ket.size() ? bra : ket;
    const auto& large = bra.size() <= ket.size() ? ket : bra;
    for (const auto& [s, c] : small.terms_) {
      auto it = large.terms_.find(s);
      if (it != large.terms_.end()) acc = acc + c * it->second;
    }
    return acc;
  }

  /// Drops every basis state failing the predicate.
  template <typename Pred>
  FockVector filtered(Pred keep) const {
    FockVector r;
    for (const auto& [s, c] : terms_)
      if (keep(s)) r.terms_.emplace(s, c);
    return r;
  }

 private:
  static int first_in_class(int lo, int stride, int offset) {
    int j = lo;
    while (((j - offset) % stride + stride) % stride != 0) ++j;
    return j;
  }

  FockVector toggle(int k, bool remove) const {
    FockVector r;
    for (const auto& [s, c] : terms_) {
      if (s.occupied(k) != remove) continue;
      const int sign = s.count_above(k);
      r.add(s.toggled(k), (sign % 2 == 0) ? c : C(-c));
    }
    return r;
  }

  Terms terms_;
};

/// Linear combination sum_k c_k f_k (or of fbar_k); a single generator is one term.
template <typename C = Polynomial>
struct FermionOp {
  bool bar = false;
  std::vector<std::pair<int, C>> terms;

  static FermionOp f(int k) { return {false, {{k, one<C>()}}}; }
  static FermionOp fbar(int k) { return {true, {{k, one<C>()}}}; }
};

template <typename C>
FockVector<C> apply(const FermionOp<C>& op, const FockVector<C>& v) {
  FockVector<C> r;
  for (const auto& [k, c] : op.terms) r += (op.bar ? v.apply_fbar(k) : v.apply_f(k)).scaled(c);
  return r;
}

template <typename C>
FockVector<C> bra_apply(const FockVector<C>& v, const FermionOp<C>& op) {
  FockVector<C> r;
  for (const auto& [k, c] : op.terms) r += (op.bar ? v.bra_fbar(k) : v.bra_f(k)).scaled(c);
  return r;
}

/// word[0] word[1] ... |v>: the rightmost operator acts first.
template <typename C>
FockVector<C> apply_word(const std::vector<FermionOp<C>>& word, FockVector<C> v) {
  for (auto it = word.rbegin(); it != word.rend(); ++it) v = apply(*it, v);
  return v;
}

/// <v| word[0] word[1] ...: the leftmost operator acts first.
template <typename C>
FockVector<C> bra_apply_word(FockVector<C> v, const std::vector<FermionOp<C>>& word) {
  for (const auto& op : word) v = bra_apply(v, op);
  return v;
}

/// Bilinear Hamiltonian sum_{j = offset mod stride} f_j fbar_{j+shift}. With
/// stride 1 this is H_shift; with stride 2 and offset alpha-1 it is
/// H^{(alpha)}_{shift/2}.
struct Bilinear {
  int stride = 1;
  int offset = 0;
  int shift = 1;
};

inline Bilinear H(int m) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "H_0 is excluded");
  return {1, 0, m};
}
inline Bilinear H2(int alpha, int k) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "H_0 is excluded");
  return {2, alpha - 1, 2 * k};
}

template <typename C>
FockVector<C> apply_H(int m, const FockVector<C>& v) {
  const auto b = H(m);
  return v.apply_bilinear(b.stride, b.offset, b.shift);
}

/// A flow exponent X = sum c_i B_i.
template <typename C = Polynomial>
struct Flow {
  std::vector<std::pair<C, Bilinear>> terms;

  bool empty() const { return terms.empty(); }
  bool lowering() const {
    return std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.second.shift > 0; });
  }

  FockVector<C> apply(const FockVector<C>& v) const {
    FockVector<C> r;
    for (const auto& [c, b] : terms) r += v.apply_bilinear(b.stride, b.offset, b.shift).scaled(c);
    return r;
  }

  std::vector<int> components(Layout layout) const {
    std::vector<int> out;
    for (const auto& [c, b] : terms) {
      const int comp = (layout == Layout::OneComponent) ? 0 : b.offset + 1;
      if (std::find(out.begin(), out.end(), comp) == out.end()) out.push_back(comp);
    }
    return out;
  }

  /// sign * sum_k t_k H_{k * direction} (one component).
  static Flow one_component(const TimeSequence<C>& t, int sign, int direction) {
    Flow f;
    for (int k = 1; k <= t.degree(); ++k)
      if (!scalar_traits<C>::is_zero(t.at(k))) f.terms.push_back({from_int<C>(sign) * t.at(k), H(direction * k)});
    return f;
  }
  /// sign * sum_k t_k H^{(alpha)}_{k * direction}.
  static Flow two_component(int alpha, const TimeSequence<C>& t, int sign, int direction) {
    Flow f;
    for (int k = 1; k <= t.degree(); ++k)
      if (!scalar_traits<C>::is_zero(t.at(k)))
        f.terms.push_back({from_int<C>(sign) * t.at(k), H2(alpha, direction * k)});
    return f;
  }

  Flow& operator+=(const Flow& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    return *this;
  }
};

/// e^X |v> for a lowering flow; the series stops once the energy is exhausted.
template <typename C>
FockVector<C> exp_lowering(const Flow<C>& x, const FockVector<C>& v) {
  if (!x.lowering()) fail(ErrorCode::InvalidArgument, "exp_lowering needs a lowering flow");
  FockVector<C> total = v;
  FockVector<C> term = v;
  for (int j = 1; !term.is_zero(); ++j) {
    FockVector<C> next = x.apply(term);
    FockVector<C> scaled;
    for (const auto& [s, c] : next.terms()) scaled.add(s, div_int(c, j));
    term = std::move(scaled);
    total += term;
  }
  return total;
}

/// e^X |v> for any flow, discarding basis states whose doubled component
/// energy exceeds its cap. Components without a cap are unconstrained, so
/// every raising term must act on a capped component.
template <typename C>
FockVector<C> exp_capped(const Flow<C>& x, const FockVector<C>& v, Layout layout, const std::array<int, 3>& caps) {
  auto keep = [&](const MayaState& s) {
    const auto e = doubled_energies(s, layout);
    for (int c = 0; c < 3; ++c)
      if (e[c] > caps[c]) return false;
    return true;
  };
  FockVector<C> total = v.filtered(keep);
  FockVector<C> term = total;
  for (int j = 1; !term.is_zero(); ++j) {
    FockVector<C> next = x.apply(term).filtered(keep);
    FockVector<C> scaled;
    for (const auto& [s, c] : next.terms()) scaled.add(s, div_int(c, j));
    term = std::move(scaled);
    total += term;
  }
  return total;
}

/// Left charged vacuum <N| = <0| C_N (one component).
template <typename C = Polynomial>
FockVector<C> bra_charged(int N) {
  std::vector<FermionOp<C>> word;
  if (N > 0)
    for (int k = 0; k <= N - 1; ++k) word.push_back(FermionOp<C>::fbar(k));
  if (N < 0)
    for (int k = -1; k >= N; --k) word.push_back(FermionOp<C>::f(k));
  return bra_apply_word(FockVector<C>::vacuum(0), word);
}

/// Right charged vacuum |N> = Cbar_N |0> (one component).
template <typename C = Polynomial>
FockVector<C> ket_charged(int N) {
  std::vector<FermionOp<C>> word;
  if (N > 0)
    for (int k = N - 1; k >= 0; --k) word.push_back(FermionOp<C>::f(k));
  if (N < 0)
    for (int k = N; k <= -1; ++k) word.push_back(FermionOp<C>::fbar(k));
  return apply_word(word, FockVector<C>::vacuum(0));
}

template <typename C>
std::vector<FermionOp<C>> left_vacuum_word(int alpha, int n) {
  std::vector<FermionOp<C>> word;
  if (n > 0)
    for (int k = 0; k <= n - 1; ++k) word.push_back(FermionOp<C>::fbar(two_component_embed(alpha, k)));
  if (n < 0)
    for (int k = -1; k >= n; --k) word.push_back(FermionOp<C>::f(two_component_embed(alpha, k)));
  return word;
}

template <typename C>
std::vector<FermionOp<C>> right_vacuum_word(int alpha, int n) {
  std::vector<FermionOp<C>> word;
  if (n > 0)
    for (int k = n - 1; k >= 0; --k) word.push_back(FermionOp<C>::f(two_component_embed(alpha, k)));
  if (n < 0)
    for (int k = n; k <= -1; ++k) word.push_back(FermionOp<C>::fbar(two_component_embed(alpha, k)));
  return word;
}

/// <n1, n2| = <0,0| C^{(1)}_{n1} C^{(2)}_{n2}.
template <typename C = Polynomial>
FockVector<C> bra_charged2(int n1, int n2) {
  auto word = left_vacuum_word<C>(1, n1);
  const auto w2 = left_vacuum_word<C>(2, n2);
  word.insert(word.end(), w2.begin(), w2.end());
  return bra_apply_word(FockVector<C>::vacuum(0), word);
}

/// |n1, n2> = Cbar^{(2)}_{n2} Cbar^{(1)}_{n1} |0,0>.
template <typename C = Polynomial>
FockVector<C> ket_charged2(int n1, int n2) {
  auto word = right_vacuum_word<C>(2, n2);
  const auto w1 = right_vacuum_word<C>(1, n1);
  word.insert(word.end(), w1.begin(), w1.end());
  return apply_word(word, FockVector<C>::vacuum(0));
}

/// <bra| e^{left} word e^{right} |ket>, evaluated exactly.
///
/// The left flow must lower energy (it is applied to the ket last). A right
/// flow that raises energy is applied to the ket with a per-component energy
/// cap: the components it touches are untouched by the left flow, so their
/// energy after `word` must equal the bra's, and the cap is that energy minus
/// the exact energy shift of each single-mode operator in `word`.
template <typename C>
C expectation(const FockVector<C>& bra, const Flow<C>& left, const std::vector<FermionOp<C>>& word,
              const Flow<C>& right, const FockVector<C>& ket, Layout layout) {
  if (!left.empty() && !left.lowering())
    fail(ErrorCode::InvalidArgument, "left flow must lower energy to act on the ket");
  FockVector<C> v = ket;
  if (!right.empty()) {
    if (right.lowering()) {
      v = exp_lowering(right, v);
    } else {
      const auto right_comps = right.components(layout);
      const auto left_comps = left.components(layout);
      for (int c : right_comps)
        if (std::find(left_comps.begin(), left_comps.end(), c) != left_comps.end())
          fail(ErrorCode::BoundExceeded, "left and right flows share a component; the expectation is not a finite sum");
      std::array<int, 3> bra_energy{std::numeric_limits<int>::min(), std::numeric_limits<int>::min(),
                                    std::numeric_limits<int>::min()};
      for (const auto& [s, c] : bra.terms()) {
        const auto e = doubled_energies(s, layout);
        for (int i = 0; i < 3; ++i) bra_energy[i] = std::max(bra_energy[i], e[i]);
      }
      std::array<int, 3> caps{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
                              std::numeric_limits<int>::max()};
      for (int comp : right_comps) {
        int cap = bra_energy[comp];
        for (const auto& op : word) {
          int min_shift = std::numeric_limits<int>::max();
          bool touches = false;
          for (const auto& [k, c] : op.terms) {
            const auto cm = split_mode(layout, k);
            if (cm.component != comp) continue;
            touches = true;
            const int d = doubled_energy_shift(cm.local) * (op.bar ? -1 : 1);
            min_shift = std::min(min_shift, d);
          }
          if (touches) cap -= min_shift;
        }
        caps[comp] = cap;
      }
      v = exp_capped(right, v, layout, caps);
    }
  }
  v = apply_word(word, v);
  if (!left.empty()) v = exp_lowering(left, v);
  return pair(bra, v);
}

/// Result of an expectation that requires a definite charge.
template <typename C>
struct VevResult {
  C value;
  bool charge_mismatch = false;
};

/// <N| e^{sum_m H_m t_m} |v> (one component).
template <typename C>
VevResult<C> exp_H_vev(int N, const TimeSequence<C>& t, const FockVector<C>& v) {
  bool has_charge = false;
  for (const auto& [s, c] : v.terms())
    if (s.charge() == N) has_charge = true;
  if (!has_charge) return {zero<C>(), true};
  const auto flow = Flow<C>::one_component(t, 1, +1);
  return {expectation(bra_charged<C>(N), flow, {}, Flow<C>{}, v, Layout::OneComponent), false};
}

/// <N| word e^{sign * sum_m H_{-m} tbar_m} |0> (one component).
template <typename C>
C exp_Hbar_right_vev(int N, const std::vector<FermionOp<C>>& word, const TimeSequence<C>& tbar, int sign) {
  const auto flow = Flow<C>::one_component(tbar, sign, -1);
  return expectation(bra_charged<C>(N), Flow<C>{}, word, flow, FockVector<C>::vacuum(0), Layout::OneComponent);
}

/// Fermionic sides of the four one-component Schur identities.
/// Returns <N| e^{sum H_m t_m} f_{h_1} ... f_{h_N} |0>.
template <typename C>
C schur_vev_creation(const Partition& lambda, int N, const TimeSequence<C>& t) {
  const auto h = shifted_labels(lambda, N);
  std::vector<FermionOp<C>> word;
  for (int hi : h) word.push_back(FermionOp<C>::f(hi));
  return exp_H_vev(N, t, apply_word(word, FockVector<C>::vacuum(0))).value;
}

/// <-N| e^{sum H_m t_m} fbar_{-h_1-1} ... fbar_{-h_N-1} |0>.
template <typename C>
C schur_vev_annihilation(const Partition& lambda, int N, const TimeSequence<C>& t) {
  const auto h = shifted_labels(lambda, N);
  std::vector<FermionOp<C>> word;
  for (int hi : h) word.push_back(FermionOp<C>::fbar(-hi - 1));
  return exp_H_vev(-N, t, apply_word(word, FockVector<C>::vacuum(0))).value;
}

/// <N| f_{N-h_1-1} ... f_{N-h_N-1} e^{-sum H_{-m} tbar_m} |0>.
template <typename C>
C schur_vev_creation_bar(const Partition& lambda, int N, const TimeSequence<C>& tbar) {
  const auto h = shifted_labels(lambda, N);
  std::vector<FermionOp<C>> word;
  for (int hi : h) word.push_back(FermionOp<C>::f(N - hi - 1));
  return exp_Hbar_right_vev(N, word, tbar, -1);
}

/// <-N| fbar_{h_1-N} ... fbar_{h_N-N} e^{sum H_{-m} tbar_m} |0>.
template <typename C>
C schur_vev_annihilation_bar(const Partition& lambda, int N, const TimeSequence<C>& tbar) {
  const auto h = shifted_labels(lambda, N);
  std::vector<FermionOp<C>> word;
  for (int hi : h) word.push_back(FermionOp<C>::fbar(hi - N));
  return exp_Hbar_right_vev(-N, word, tbar, +1);
}

/// <0| w_1 ... w_N wbar_N ... wbar_1 |0> against det(<0| w_i wbar_j |0>).
template <typename C>
std::pair<C, C> wick_determinant_sides(const std::vector<FermionOp<C>>& w, const std::vector<FermionOp<C>>& wbar) {
  const std::size_t N = w.size();
  if (wbar.size() != N) fail(ErrorCode::InvalidArgument, "Wick check needs equally many w and wbar");
  if (N > 6) fail(ErrorCode::BoundExceeded, "Wick check limited to N <= 6");
  std::vector<FermionOp<C>> word(w.begin(), w.end());
  for (std::size_t i = N; i-- > 0;) word.push_back(wbar[i]);
  const auto vac = FockVector<C>::vacuum(0);
  const C lhs = pair(vac, apply_word(word, vac));
  Matrix<C> m(N, N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) m(i, j) = pair(vac, apply(w[i], apply(wbar[j], vac)));
  return {lhs, determinant(m)};
}

template <typename C>
bool wick_determinant_check(const std::vector<FermionOp<C>>& w, const std::vector<FermionOp<C>>& wbar) {
  const auto [lhs, rhs] = wick_determinant_sides(w, wbar);
  return lhs == rhs;
}

/// <N+n, -N-m| prod_i f^{(1)}(x_i) fbar^{(2)}(y_i) |n, -m> with x_i, y_i formal.
/// Only modes n..n+N-1 of component 1 and -N-m..-m-1 of component 2 can
/// connect the two charged vacua, so the generating functions are cut there.
inline Polynomial vandermonde_vev(int N, int n, int m) {
  if (N < 0) return Polynomial(0);
  if (N > 5) fail(ErrorCode::BoundExceeded, "vandermonde_vev limited to N <= 5");
  using P = Polynomial;
  auto power = [](VarFamily f, int i, int e) { return e == 0 ? P(1) : P::variable(f, i, e); };
  std::vector<FermionOp<P>> word;
  for (int i = 1; i <= N; ++i) {
    FermionOp<P> fx{false, {}};
    for (int k = n; k <= n + N - 1; ++k) fx.terms.push_back({two_component_embed(1, k), power(VarFamily::X, i, k)});
    FermionOp<P> fy{true, {}};
    for (int k = -N - m; k <= -m - 1; ++k) fy.terms.push_back({two_component_embed(2, k), power(VarFamily::Y, i, -k - 1)});
    word.push_back(fx);
    word.push_back(fy);
  }
  return expectation(bra_charged2<P>(N + n, -N - m), Flow<P>{}, word, Flow<P>{}, ket_charged2<P>(n, -m),
                     Layout::TwoComponent);
}

/// (-1)^{N(N+1)/2} Delta_N(x) Delta_N(y) prod_i x_i^n (-y_i)^m, formal.
inline Polynomial vandermonde_vev_expected(int N, int n, int m) {
  using P = Polynomial;
  if (N < 0) return P(0);
  P r = P(sign_power<long>(static_cast<long>(N) * (N + 1) / 2));
  for (int i = 1; i <= N; ++i)
    for (int j = i + 1; j <= N; ++j) {
      r *= P::variable(VarFamily::X, i) - P::variable(VarFamily::X, j);
      r *= P::variable(VarFamily::Y, i) - P::variable(VarFamily::Y, j);
    }
  for (int i = 1; i <= N; ++i) {
    if (n != 0) r *= P::variable(VarFamily::X, i, n);
    if (m != 0) r *= P::variable(VarFamily::Y, i, m).scaled(Rational(m % 2 == 0 ? 1 : -1));
  }
  return r;
}

/// The four two-component Schur-product expectations.
enum class Variant { PP, MM, PM, MP };

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::PP: return "++";
    case Variant::MM: return "--";
    case Variant::PM: return "+-";
    case Variant::MP: return "-+";
  }
  return "?";
}

/// Sign relating schur_product_vev to s_lambda s_mu: (-1)^{N(N+1)/2} for ++
/// and --, (-1)^N for +- and -+ (confirmed by the oracle for N <= 3).
inline long schur_product_sign(Variant v, int N) {
  if (v == Variant::PP || v == Variant::MM) return sign_power<long>(static_cast<long>(N) * (N + 1) / 2);
  return sign_power<long>(N);
}

/// Two-component expectation whose value is a signed product of two Schur
/// functions, with lambda on component 1 and mu on component 2:
///   ++ <N,-N| e^{H1(t1) - H2(t2)} f1_{h_1} fb2_{-h'_1-1} ... |0,0>
///   -- <N,-N| f1_{N-h_1-1} fb2_{h'_1-N} ... e^{H2(tb2) - H1(tb1)} |0,0>
///   +- <N,-N| e^{H1(t1)} f1_{h_1} fb2_{h'_1-N} ... e^{H2(tb2)} |0,0>
///   -+ <N,-N| e^{-H2(t2)} f1_{N-h_1-1} fb2_{-h'_1-1} ... e^{-H1(tb1)} |0,0>
/// where H_alpha(tb) = sum_k tb_k H^{(alpha)}_{-k}. The first time sequence
/// drives lambda, the second mu.
template <typename C = Polynomial>
C schur_product_vev(Variant variant, const Partition& lambda, const Partition& mu, int N, const TimeSequence<C>& first,
                    const TimeSequence<C>& second) {
  if (N > 4 || lambda.weight() > 6 || mu.weight() > 6)
    fail(ErrorCode::BoundExceeded, "schur_product_vev limited to N <= 4 and weights <= 6");
  const auto h = shifted_labels(lambda, N);
  const auto hp = shifted_labels(mu, N);
  const bool lambda_plus = (variant == Variant::PP || variant == Variant::PM);
  const bool mu_plus = (variant == Variant::PP || variant == Variant::MP);
  std::vector<FermionOp<C>> word;
  for (int i = 0; i < N; ++i) {
    word.push_back(FermionOp<C>::f(two_component_embed(1, lambda_plus ? h[i] : N - h[i] - 1)));
    word.push_back(FermionOp<C>::fbar(two_component_embed(2, mu_plus ? -hp[i] - 1 : hp[i] - N)));
  }
  Flow<C> left, right;
  switch (variant) {
    case Variant::PP:
      left = Flow<C>::two_component(1, first, +1, +1);
      left += Flow<C>::two_component(2, second, -1, +1);
      break;
    case Variant::MM:
      right = Flow<C>::two_component(2, second, +1, -1);
      right += Flow<C>::two_component(1, first, -1, -1);
      break;
    case Variant::PM:
      left = Flow<C>::two_component(1, first, +1, +1);
      right = Flow<C>::two_component(2, second, +1, -1);
      break;
    case Variant::MP:
      left = Flow<C>::two_component(2, second, -1, +1);
      right = Flow<C>::two_component(1, first, -1, -1);
      break;
  }
  return expectation(bra_charged2<C>(N, -N), left, word, right, FockVector<C>::vacuum(0), Layout::TwoComponent);
}

}  // namespace zn2mm::fermion
