#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gpsm/errors.hpp"
#include "gpsm/modem.hpp"
#include "gpsm/pattern_space.hpp"

namespace gpsm {

struct DetectionResult {
  std::uint32_t pattern_index = 0;
  std::vector<std::uint32_t> symbol_labels;  // ascending active-antenna order
  std::vector<cd> symbols;                   // the corresponding points
  double metric = 0.0;
};

/// Scratch buffers for the joint detector. prepare() caches the activity
/// table of one pattern set; reuse across channel uses avoids reallocation.
class DetectorWorkspace {
 public:
  void prepare(const PatternSet& set) {
    n_r_ = set.antenna_count();
    n_patterns_ = set.size();
    active_.assign(n_patterns_ * static_cast<std::size_t>(n_r_), 0);
    for (std::size_t q = 0; q < n_patterns_; ++q)
      for (int a : set[q].active())
        active_[q * static_cast<std::size_t>(n_r_) + static_cast<std::size_t>(a)] = 1;
    abs2_.resize(static_cast<std::size_t>(n_r_));
    best_d_.resize(static_cast<std::size_t>(n_r_));
    best_label_.resize(static_cast<std::size_t>(n_r_));
    prepared_patterns_ = set.patterns();
  }

  bool prepared_for(const PatternSet& set) const {
    return prepared_patterns_ == set.patterns();
  }

 private:
  friend void ml_detect(const Eigen::VectorXcd&, double, const PatternSet&,
                        const Constellation&, DetectorWorkspace&, DetectionResult&);
  std::size_t n_patterns_ = 0;
  int n_r_ = 0;
  std::vector<Pattern> prepared_patterns_;
  std::vector<std::uint8_t> active_;
  std::vector<double> abs2_;
  std::vector<double> best_d_;
  std::vector<std::uint32_t> best_label_;
};

/// Joint maximum-likelihood detection of (pattern, symbols) from one user's
/// receive vector y. The candidate metric splits per antenna: an active
/// antenna contributes min_label |y_i - sqrt(e) b|^2, an inactive one |y_i|^2,
/// so each antenna's best label is found once and patterns are scored by
/// summing antenna terms in antenna order. Ties prefer the smallest pattern
/// index, then the smallest label per antenna.
inline void ml_detect(const Eigen::VectorXcd& y, double e, const PatternSet& set,
                      const Constellation& c, DetectorWorkspace& ws,
                      DetectionResult& out) {
  const int n_r = set.antenna_count();
  if (y.size() != n_r) throw ConfigError("ml_detect: receive vector length mismatch");
  if (!ws.prepared_for(set)) ws.prepare(set);

  const double scale = std::sqrt(e > 0.0 ? e : 0.0);
  const std::vector<cd>& pts = c.points();
  for (int i = 0; i < n_r; ++i) {
    const cd yi = y(i);
    ws.abs2_[static_cast<std::size_t>(i)] = std::norm(yi);
    std::uint32_t bl = 0;
    double bd = std::norm(yi - scale * pts[0]);
    for (std::uint32_t l = 1; l < pts.size(); ++l) {
      const double d = std::norm(yi - scale * pts[l]);
      if (d < bd) {
        bd = d;
        bl = l;
      }
    }
    ws.best_d_[static_cast<std::size_t>(i)] = bd;
    ws.best_label_[static_cast<std::size_t>(i)] = bl;
  }

  std::uint32_t best_q = 0;
  double best_metric = 0.0;
  for (std::size_t q = 0; q < set.size(); ++q) {
    const std::uint8_t* row = ws.active_.data() + q * static_cast<std::size_t>(n_r);
    double m = 0.0;
    for (int i = 0; i < n_r; ++i)
      m += row[i] ? ws.best_d_[static_cast<std::size_t>(i)]
                  : ws.abs2_[static_cast<std::size_t>(i)];
    if (q == 0 || m < best_metric) {
      best_metric = m;
      best_q = static_cast<std::uint32_t>(q);
    }
  }

  out.pattern_index = best_q;
  out.metric = best_metric;
  const std::vector<int>& act = set[best_q].active();
  out.symbol_labels.resize(act.size());
  out.symbols.resize(act.size());
  for (std::size_t i = 0; i < act.size(); ++i) {
    const std::uint32_t l = ws.best_label_[static_cast<std::size_t>(act[i])];
    out.symbol_labels[i] = l;
    out.symbols[i] = pts[l];
  }
}

inline DetectionResult ml_detect(const Eigen::VectorXcd& y, double e,
                                 const PatternSet& set, const Constellation& c) {
  DetectorWorkspace ws;
  DetectionResult r;
  ml_detect(y, e, set, c, ws, r);
  return r;
}

}  // namespace gpsm
