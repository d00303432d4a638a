#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gpsm/errors.hpp"
#include "gpsm/rng.hpp"

namespace gpsm {

/// Binomial coefficient C(n_r, n_iba) with exact integer arithmetic.
/// Throws NumericError if the value does not fit in 64 bits.
inline std::uint64_t count_combinations(int n_r, int n_iba) {
  if (n_iba < 1 || n_iba > n_r)
    throw ConfigError("count_combinations: require 1 <= n_iba <= n_r, got n_iba=" +
                      std::to_string(n_iba) + ", n_r=" + std::to_string(n_r));
  const std::uint64_t n = static_cast<std::uint64_t>(n_r);
  std::uint64_t k = static_cast<std::uint64_t>(n_iba);
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;  // exact: product of i consecutive integers is divisible by i!
    if (r > UINT64_MAX)
      throw NumericError("count_combinations: C(" + std::to_string(n_r) + "," +
                         std::to_string(n_iba) + ") exceeds 64-bit range");
  }
  return static_cast<std::uint64_t>(r);
}

/// floor(log2(c_t)), computed on the integer itself (no floating point).
inline int spatial_bits(std::uint64_t c_t) {
  if (c_t < 1) throw ConfigError("spatial_bits: c_t must be >= 1");
  return std::bit_width(c_t) - 1;
}

inline int ceil_log2(std::uint64_t x) {
  if (x < 1) throw ConfigError("ceil_log2: argument must be >= 1");
  return x == 1 ? 0 : std::bit_width(x - 1);
}

/// Bits per channel use across all users: K * (k_ssk + N_iba * log2(M)).
inline std::uint64_t throughput(int k_users, int k_ssk, int n_iba, int m) {
  if (k_users < 1 || k_ssk < 0 || n_iba < 1)
    throw ConfigError("throughput: invalid user/bit counts");
  if (m < 2 || !std::has_single_bit(static_cast<std::uint64_t>(m)))
    throw ConfigError("throughput: modulation order must be a power of 2, got " +
                      std::to_string(m));
  const int bps = spatial_bits(static_cast<std::uint64_t>(m));
  return static_cast<std::uint64_t>(k_users) *
         (static_cast<std::uint64_t>(k_ssk) + static_cast<std::uint64_t>(n_iba) * bps);
}

/// Receive-antenna activation pattern: which N_iba of the N_r antennas carry
/// information symbols. Stored as the ascending list of active antenna indices
/// (0-based); patterns order lexicographically by that index tuple.
class Pattern {
 public:
  Pattern(int n_r, std::vector<int> active) : n_r_(n_r), active_(std::move(active)) {
    if (n_r_ < 1) throw ConfigError("Pattern: n_r must be positive");
    if (active_.empty() || static_cast<int>(active_.size()) > n_r_)
      throw ConfigError("Pattern: require 1 <= active count <= n_r");
    for (std::size_t i = 0; i < active_.size(); ++i) {
      if (active_[i] < 0 || active_[i] >= n_r_)
        throw ConfigError("Pattern: active index out of range");
      if (i > 0 && active_[i] <= active_[i - 1])
        throw ConfigError("Pattern: active indices must be strictly increasing");
    }
  }

  int size() const { return n_r_; }
  int active_count() const { return static_cast<int>(active_.size()); }
  const std::vector<int>& active() const { return active_; }

  /// 0/1 activation vector of length n_r.
  std::vector<int> bits() const {
    std::vector<int> b(static_cast<std::size_t>(n_r_), 0);
    for (int i : active_) b[static_cast<std::size_t>(i)] = 1;
    return b;
  }

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend auto operator<=>(const Pattern&, const Pattern&) = default;

 private:
  int n_r_;
  std::vector<int> active_;
};

/// All C(n_r, n_iba) patterns in lexicographically ascending order of their
/// activation index tuples.
inline std::vector<Pattern> enumerate_patterns(int n_r, int n_iba) {
  const std::uint64_t total = count_combinations(n_r, n_iba);
  std::vector<Pattern> out;
  out.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(n_iba));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.emplace_back(n_r, idx);
    int p = n_iba - 1;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == n_r - n_iba + p) --p;
    if (p < 0) break;
    ++idx[static_cast<std::size_t>(p)];
    for (int q = p + 1; q < n_iba; ++q)
      idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
  }
  return out;
}

/// Ordered set of distinct patterns together with its mean activation vector
/// q-bar. Construction canonicalizes: patterns are sorted into lexicographic
/// order, so the pattern index seen by the spatial bits is reproducible.
class PatternSet {
 public:
  explicit PatternSet(std::vector<Pattern> patterns) : patterns_(std::move(patterns)) {
    if (patterns_.empty()) throw ConfigError("PatternSet: empty pattern list");
    std::sort(patterns_.begin(), patterns_.end());
    const int n_r = patterns_.front().size();
    const int n_iba = patterns_.front().active_count();
    for (std::size_t i = 0; i < patterns_.size(); ++i) {
      if (patterns_[i].size() != n_r || patterns_[i].active_count() != n_iba)
        throw ConfigError("PatternSet: mixed pattern dimensions");
      if (i > 0 && patterns_[i] == patterns_[i - 1])
        throw ConfigError("PatternSet: duplicate pattern");
    }
    mean_.assign(static_cast<std::size_t>(n_r), 0.0);
    for (const Pattern& p : patterns_)
      for (int a : p.active()) mean_[static_cast<std::size_t>(a)] += 1.0;
    const double inv = 1.0 / static_cast<double>(patterns_.size());
    for (double& v : mean_) v *= inv;
  }

  std::size_t size() const { return patterns_.size(); }
  const Pattern& operator[](std::size_t i) const { return patterns_[i]; }
  const std::vector<Pattern>& patterns() const { return patterns_; }
  int antenna_count() const { return patterns_.front().size(); }
  int active_count() const { return patterns_.front().active_count(); }

  /// q-bar: per-antenna activation frequency, summing to N_iba.
  const std::vector<double>& mean() const { return mean_; }

  friend bool operator==(const PatternSet& a, const PatternSet& b) {
    return a.patterns_ == b.patterns_;
  }

 private:
  std::vector<Pattern> patterns_;
  std::vector<double> mean_;
};

inline std::vector<double> mean_pattern(const PatternSet& set) { return set.mean(); }

/// Derived characteristics of the pattern space for one (n_r, n_iba) choice.
struct PatternSpaceSpec {
  int n_r = 0;
  int n_iba = 0;
  std::uint64_t c_t = 0;  // total pattern count C(n_r, n_iba)
  int k_ssk = 0;          // spatial bits per channel use
  std::uint64_t n_c = 0;  // valid patterns actually used, 2^k_ssk
  std::uint64_t l = 0;    // candidate set count C(c_t, n_c)

  PatternSpaceSpec(int n_r_in, int n_iba_in) : n_r(n_r_in), n_iba(n_iba_in) {
    c_t = count_combinations(n_r, n_iba);
    k_ssk = spatial_bits(c_t);
    n_c = std::uint64_t{1} << k_ssk;
    l = count_combinations(static_cast<int>(c_t), static_cast<int>(n_c));
  }
};

/// Average per-pattern column-energy load of the set: g . q-bar.
inline double set_cost(const PatternSet& set, std::span<const double> g) {
  const std::vector<double>& qbar = set.mean();
  if (g.size() != qbar.size())
    throw ConfigError("set_cost: g length does not match antenna count");
  double c = 0.0;
  for (std::size_t i = 0; i < qbar.size(); ++i) c += g[i] * qbar[i];
  return c;
}

namespace detail {

/// Cost of a single pattern under column energies g, summed in antenna order.
inline double pattern_cost(const Pattern& p, std::span<const double> g) {
  double c = 0.0;
  for (int a : p.active()) c += g[static_cast<std::size_t>(a)];
  return c;
}

inline void check_g(std::span<const double> g, const PatternSpaceSpec& spec) {
  if (static_cast<int>(g.size()) != spec.n_r)
    throw ConfigError("optimize_pattern_set: g length does not match n_r");
  for (double v : g)
    if (v < 0.0) throw ConfigError("optimize_pattern_set: g entries must be nonnegative");
}

}  // namespace detail

/// Materializes the candidate set with the given canonical index. Candidate
/// sets are the N_c-subsets of the lexicographically ordered pattern list,
/// themselves ordered lexicographically by their pattern-index tuples
/// (combinadic unranking).
inline PatternSet pattern_set_from_index(const PatternSpaceSpec& spec,
                                         std::uint64_t set_index) {
  if (set_index >= spec.l)
    throw ConfigError("pattern_set_from_index: index " + std::to_string(set_index) +
                      " out of range, L=" + std::to_string(spec.l));
  const std::vector<Pattern> all = enumerate_patterns(spec.n_r, spec.n_iba);
  const int n = static_cast<int>(spec.c_t);
  const int k = static_cast<int>(spec.n_c);
  std::vector<Pattern> chosen;
  chosen.reserve(spec.n_c);
  std::uint64_t rank = set_index;
  int start = 0;
  for (int pos = 0; pos < k; ++pos) {
    for (int v = start; v < n; ++v) {
      const int rem = k - 1 - pos;
      const std::uint64_t count =
          rem == 0 ? 1 : (n - 1 - v >= rem ? count_combinations(n - 1 - v, rem) : 0);
      if (rank < count) {
        chosen.push_back(all[static_cast<std::size_t>(v)]);
        start = v + 1;
        break;
      }
      rank -= count;
    }
  }
  return PatternSet(std::move(chosen));
}

/// Rank of a strictly increasing combination within the lexicographic
/// enumeration of all same-size combinations drawn from [0, n).
inline std::uint64_t combination_rank(int n, std::span<const int> comb) {
  const int k = static_cast<int>(comb.size());
  std::uint64_t rank = 0;
  int prev = -1;
  for (int i = 0; i < k; ++i) {
    for (int v = prev + 1; v < comb[static_cast<std::size_t>(i)]; ++v) {
      const int rem = k - 1 - i;
      rank += rem == 0 ? 1 : (n - 1 - v >= rem ? count_combinations(n - 1 - v, rem) : 0);
    }
    prev = comb[static_cast<std::size_t>(i)];
  }
  return rank;
}

/// Index of the pattern within enumerate_patterns(n_r, n_iba).
inline std::uint64_t pattern_rank(const Pattern& p) {
  return combination_rank(p.size(), p.active());
}

/// Canonical index of the set: inverse of pattern_set_from_index.
inline std::uint64_t pattern_set_index(const PatternSpaceSpec& spec,
                                       const PatternSet& set) {
  if (set.antenna_count() != spec.n_r || set.active_count() != spec.n_iba ||
      set.size() != spec.n_c)
    throw ConfigError("pattern_set_index: set does not match the pattern space");
  std::vector<int> ranks;
  ranks.reserve(set.size());
  for (const Pattern& p : set.patterns())
    ranks.push_back(static_cast<int>(pattern_rank(p)));
  return combination_rank(static_cast<int>(spec.c_t), ranks);
}

/// Exhaustive minimization of set_cost over all L candidate sets; ties broken
/// by smallest canonical set index. Guarded by the enumeration cap.
inline PatternSet optimize_pattern_set_exhaustive(std::span<const double> g,
                                                  const PatternSpaceSpec& spec,
                                                  std::uint64_t cap = 1'000'000) {
  detail::check_g(g, spec);
  if (spec.l > cap)
    throw NumericError("optimize_pattern_set_exhaustive: L=" + std::to_string(spec.l) +
                       " exceeds enumeration cap " + std::to_string(cap));
  const std::vector<Pattern> all = enumerate_patterns(spec.n_r, spec.n_iba);
  std::vector<double> cost(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) cost[i] = detail::pattern_cost(all[i], g);

  const int n = static_cast<int>(spec.c_t);
  const int k = static_cast<int>(spec.n_c);
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> best;
  double best_cost = 0.0;
  bool first = true;
  while (true) {
    double c = 0.0;
    for (int i : idx) c += cost[static_cast<std::size_t>(i)];
    if (first || c < best_cost) {
      best = idx;
      best_cost = c;
      first = false;
    }
    int p = k - 1;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == n - k + p) --p;
    if (p < 0) break;
    ++idx[static_cast<std::size_t>(p)];
    for (int q = p + 1; q < k; ++q)
      idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
  }
  std::vector<Pattern> chosen;
  chosen.reserve(best.size());
  for (int i : best) chosen.push_back(all[static_cast<std::size_t>(i)]);
  return PatternSet(std::move(chosen));
}

/// Default optimizer: because the set cost is the average of per-pattern costs
/// and every N_c-subset is a candidate, the optimum is the N_c individually
/// cheapest patterns (ties by smallest pattern index). Equivalent to the
/// exhaustive search, without enumerating the L sets; the cap is still honored
/// so both routes accept exactly the same configurations.
inline PatternSet optimize_pattern_set(std::span<const double> g,
                                       const PatternSpaceSpec& spec,
                                       std::uint64_t cap = 1'000'000) {
  detail::check_g(g, spec);
  if (spec.l > cap)
    throw NumericError("optimize_pattern_set: L=" + std::to_string(spec.l) +
                       " exceeds enumeration cap " + std::to_string(cap));
  const std::vector<Pattern> all = enumerate_patterns(spec.n_r, spec.n_iba);
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> cost(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) cost[i] = detail::pattern_cost(all[i], g);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cost[a] != cost[b]) return cost[a] < cost[b];
    return a < b;
  });
  std::vector<Pattern> chosen;
  chosen.reserve(spec.n_c);
  for (std::uint64_t i = 0; i < spec.n_c; ++i) chosen.push_back(all[order[i]]);
  return PatternSet(std::move(chosen));
}

/// Uniformly random candidate set, deterministic given the rng state.
inline PatternSet random_pattern_set(const PatternSpaceSpec& spec, Rng& rng,
                                     std::uint64_t cap = 1'000'000) {
  if (spec.l > cap)
    throw NumericError("random_pattern_set: L=" + std::to_string(spec.l) +
                       " exceeds enumeration cap " + std::to_string(cap));
  return pattern_set_from_index(spec, rng.below(spec.l));
}

}  // namespace gpsm
