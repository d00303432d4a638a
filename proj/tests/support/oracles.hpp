#pragma once

// Independent reference implementations and statistics helpers for tests.
// These deliberately avoid the decomposed/greedy shortcuts used by the
// library so that agreement between the two routes is meaningful.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "gpsm/detector.hpp"
#include "gpsm/modem.hpp"
#include "gpsm/pattern_space.hpp"

namespace oracles {

/// Joint ML detection by full enumeration of all N_c * M^N_iba candidates.
/// Candidates are visited patterns-ascending, then label tuples in ascending
/// lexicographic order; strict < keeps the first minimum, which realizes the
/// smallest-pattern-then-smallest-labels tie-break. Metric terms accumulate
/// in antenna order, matching the decomposed detector bit for bit.
inline gpsm::DetectionResult brute_force_detect(const Eigen::VectorXcd& y, double e,
                                                const gpsm::PatternSet& set,
                                                const gpsm::Constellation& c) {
  const int n_r = set.antenna_count();
  const int n_iba = set.active_count();
  const double scale = std::sqrt(e > 0.0 ? e : 0.0);
  const std::vector<gpsm::cd>& pts = c.points();
  const std::uint32_t m = static_cast<std::uint32_t>(c.order());

  gpsm::DetectionResult best;
  bool first = true;
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(n_iba), 0);
  for (std::uint32_t q = 0; q < set.size(); ++q) {
    const std::vector<int>& act = set[q].active();
    std::vector<int> is_active(static_cast<std::size_t>(n_r), -1);
    for (std::size_t i = 0; i < act.size(); ++i)
      is_active[static_cast<std::size_t>(act[i])] = static_cast<int>(i);

    std::fill(labels.begin(), labels.end(), 0u);
    while (true) {
      double metric = 0.0;
      for (int i = 0; i < n_r; ++i) {
        const int slot = is_active[static_cast<std::size_t>(i)];
        if (slot >= 0)
          metric += std::norm(y(i) - scale * pts[labels[static_cast<std::size_t>(slot)]]);
        else
          metric += std::norm(y(i));
      }
      if (first || metric < best.metric) {
        first = false;
        best.metric = metric;
        best.pattern_index = q;
        best.symbol_labels = labels;
      }
      // next label tuple, last slot fastest (ascending lexicographic order)
      int pos = n_iba - 1;
      while (pos >= 0 && labels[static_cast<std::size_t>(pos)] == m - 1) {
        labels[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++labels[static_cast<std::size_t>(pos)];
    }
  }
  best.symbols.resize(best.symbol_labels.size());
  for (std::size_t i = 0; i < best.symbol_labels.size(); ++i)
    best.symbols[i] = pts[best.symbol_labels[i]];
  return best;
}

/// Pattern-set optimization by enumerating every candidate set in canonical
/// order and scoring it with set_cost; strict < keeps the first (smallest
/// index) minimum.
inline gpsm::PatternSet exhaustive_optimize(std::span<const double> g,
                                            const gpsm::PatternSpaceSpec& spec) {
  const std::vector<gpsm::Pattern> all = gpsm::enumerate_patterns(spec.n_r, spec.n_iba);
  const int n = static_cast<int>(spec.c_t);
  const int k = static_cast<int>(spec.n_c);
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);

  std::vector<gpsm::Pattern> best_patterns;
  double best_cost = 0.0;
  bool first = true;
  while (true) {
    std::vector<gpsm::Pattern> candidate;
    candidate.reserve(static_cast<std::size_t>(k));
    for (int i : idx) candidate.push_back(all[static_cast<std::size_t>(i)]);
    gpsm::PatternSet set(candidate);
    const double cost = gpsm::set_cost(set, g);
    if (first || cost < best_cost) {
      first = false;
      best_cost = cost;
      best_patterns = std::move(candidate);
    }
    int p = k - 1;
    while (p >= 0 && idx[static_cast<std::size_t>(p)] == n - k + p) --p;
    if (p < 0) break;
    ++idx[static_cast<std::size_t>(p)];
    for (int q2 = p + 1; q2 < k; ++q2)
      idx[static_cast<std::size_t>(q2)] = idx[static_cast<std::size_t>(q2 - 1)] + 1;
  }
  return gpsm::PatternSet(std::move(best_patterns));
}

inline double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Standard error of the sample mean.
inline double stderr_of_mean(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double n = static_cast<double>(xs.size());
  return std::sqrt(ss / (n * (n - 1.0)));
}

/// z statistic of the paired differences a[i] - b[i].
inline double paired_z(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double se = stderr_of_mean(d);
  if (se == 0.0) return mean(d) == 0.0 ? 0.0 : std::copysign(1e9, mean(d));
  return mean(d) / se;
}

}  // namespace oracles
