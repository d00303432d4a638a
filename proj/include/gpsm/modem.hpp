#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gpsm/errors.hpp"
#include "gpsm/pattern_space.hpp"

namespace gpsm {

using cd = std::complex<double>;

/// Unit-energy constellation, indexed by bit label. Gray-labelled for m = 4.
class Constellation {
 public:
  static Constellation make(int m) {
    Constellation c;
    c.m_ = m;
    switch (m) {
      case 2:
        c.bits_per_symbol_ = 1;
        c.points_ = {cd{1.0, 0.0}, cd{-1.0, 0.0}};
        break;
      case 4: {
        c.bits_per_symbol_ = 2;
        const double s = 1.0 / std::sqrt(2.0);
        // Gray map: adjacent points differ in one bit. Labels 00,01,11,10 walk
        // the quadrants counterclockwise from (+,+).
        c.points_ = {cd{s, s}, cd{-s, s}, cd{s, -s}, cd{-s, -s}};
        break;
      }
      default:
        throw ConfigError("Constellation: unsupported order " + std::to_string(m) +
                          " (supported: 2, 4)");
    }
    return c;
  }

  int order() const { return m_; }
  int bits_per_symbol() const { return bits_per_symbol_; }
  cd point(std::uint32_t label) const {
    if (label >= points_.size())
      throw ConfigError("Constellation: label out of range");
    return points_[label];
  }
  const std::vector<cd>& points() const { return points_; }

  /// Label of the point closest to z; ties resolve to the smallest label.
  std::uint32_t nearest(cd z) const {
    std::uint32_t best = 0;
    double best_d = std::norm(z - points_[0]);
    for (std::uint32_t l = 1; l < points_.size(); ++l) {
      const double d = std::norm(z - points_[l]);
      if (d < best_d) {
        best_d = d;
        best = l;
      }
    }
    return best;
  }

 private:
  int m_ = 0;
  int bits_per_symbol_ = 0;
  std::vector<cd> points_;
};

/// Antenna-position selector Omega for one pattern: maps between the dense
/// n_r-length receive vector and the n_iba-length active-symbol vector.
class PositionMatrix {
 public:
  explicit PositionMatrix(Pattern pattern) : pattern_(std::move(pattern)) {}

  const Pattern& pattern() const { return pattern_; }
  const std::vector<int>& active() const { return pattern_.active(); }
  int rows() const { return pattern_.size(); }
  int cols() const { return pattern_.active_count(); }

  /// Places symbols on the active antennas, zero elsewhere.
  Eigen::VectorXcd scatter(const Eigen::VectorXcd& symbols) const {
    if (symbols.size() != cols())
      throw ConfigError("PositionMatrix::scatter: symbol count mismatch");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(rows());
    const std::vector<int>& a = pattern_.active();
    for (int i = 0; i < cols(); ++i) out(a[static_cast<std::size_t>(i)]) = symbols(i);
    return out;
  }

  /// Extracts the active entries of a dense receive vector.
  Eigen::VectorXcd gather(const Eigen::VectorXcd& dense_vec) const {
    if (dense_vec.size() != rows())
      throw ConfigError("PositionMatrix::gather: vector length mismatch");
    Eigen::VectorXcd out(cols());
    const std::vector<int>& a = pattern_.active();
    for (int i = 0; i < cols(); ++i) out(i) = dense_vec(a[static_cast<std::size_t>(i)]);
    return out;
  }

  /// Explicit n_r x n_iba selection matrix (columns of the identity).
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows(), cols());
    const std::vector<int>& a = pattern_.active();
    for (int i = 0; i < cols(); ++i) m(a[static_cast<std::size_t>(i)], i) = 1.0;
    return m;
  }

 private:
  Pattern pattern_;
};

/// One user's channel-use payload: which pattern carries it and the labels of
/// the symbols on the active antennas, in ascending antenna order.
struct SpatialSymbol {
  std::uint32_t pattern_index = 0;
  std::vector<std::uint32_t> symbol_labels;

  friend bool operator==(const SpatialSymbol&, const SpatialSymbol&) = default;
};

inline int bits_per_use(const PatternSet& set, const Constellation& c) {
  const int k_ssk = spatial_bits(static_cast<std::uint64_t>(set.size()));
  return k_ssk + set.active_count() * c.bits_per_symbol();
}

/// Maps one user's bit group onto a spatial symbol. The first k_ssk bits pick
/// the pattern (MSB first); each following bits_per_symbol group labels one
/// active antenna, in ascending antenna order.
inline void map_bits(std::span<const int> bits, const PatternSet& set,
                     const Constellation& c, SpatialSymbol& out) {
  const int k_ssk = spatial_bits(static_cast<std::uint64_t>(set.size()));
  const int n_iba = set.active_count();
  const int bps = c.bits_per_symbol();
  if (static_cast<int>(bits.size()) != k_ssk + n_iba * bps)
    throw ConfigError("map_bits: expected " + std::to_string(k_ssk + n_iba * bps) +
                      " bits, got " + std::to_string(bits.size()));
  std::uint32_t idx = 0;
  for (int i = 0; i < k_ssk; ++i) idx = (idx << 1) | static_cast<std::uint32_t>(bits[i] & 1);
  out.pattern_index = idx;
  out.symbol_labels.resize(static_cast<std::size_t>(n_iba));
  int pos = k_ssk;
  for (int s = 0; s < n_iba; ++s) {
    std::uint32_t label = 0;
    for (int b = 0; b < bps; ++b)
      label = (label << 1) | static_cast<std::uint32_t>(bits[pos++] & 1);
    out.symbol_labels[static_cast<std::size_t>(s)] = label;
  }
}

inline SpatialSymbol map_bits(std::span<const int> bits, const PatternSet& set,
                              const Constellation& c) {
  SpatialSymbol s;
  map_bits(bits, set, c, s);
  return s;
}

/// Inverse of map_bits; appends to out.
inline void demap_bits(const SpatialSymbol& sym, const PatternSet& set,
                       const Constellation& c, std::vector<int>& out) {
  const int k_ssk = spatial_bits(static_cast<std::uint64_t>(set.size()));
  if (sym.pattern_index >= set.size())
    throw ConfigError("demap_bits: pattern index out of range");
  if (static_cast<int>(sym.symbol_labels.size()) != set.active_count())
    throw ConfigError("demap_bits: symbol count mismatch");
  for (int i = k_ssk - 1; i >= 0; --i)
    out.push_back(static_cast<int>((sym.pattern_index >> i) & 1u));
  const int bps = c.bits_per_symbol();
  for (std::uint32_t label : sym.symbol_labels) {
    if (label >= static_cast<std::uint32_t>(c.order()))
      throw ConfigError("demap_bits: symbol label out of range");
    for (int b = bps - 1; b >= 0; --b)
      out.push_back(static_cast<int>((label >> b) & 1u));
  }
}

inline std::vector<int> demap_bits(const SpatialSymbol& sym, const PatternSet& set,
                                   const Constellation& c) {
  std::vector<int> bits;
  demap_bits(sym, set, c, bits);
  return bits;
}

/// Dense n_r-length transmit payload for one user: constellation points on the
/// pattern's active antennas, zeros elsewhere. Writes into out (resized).
inline void assemble_user_vector(const SpatialSymbol& sym, const PatternSet& set,
                                 const Constellation& c, Eigen::VectorXcd& out) {
  if (sym.pattern_index >= set.size())
    throw ConfigError("assemble_user_vector: pattern index out of range");
  const Pattern& p = set[sym.pattern_index];
  out.setZero(p.size());
  const std::vector<int>& a = p.active();
  if (sym.symbol_labels.size() != a.size())
    throw ConfigError("assemble_user_vector: symbol count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i)
    out(a[i]) = c.point(sym.symbol_labels[i]);
}

inline Eigen::VectorXcd assemble_user_vector(const SpatialSymbol& sym,
                                             const PatternSet& set,
                                             const Constellation& c) {
  Eigen::VectorXcd v;
  assemble_user_vector(sym, set, c, v);
  return v;
}

/// sqrt(e_k) * U(q) * b: symbol vector b placed on the active antennas with
/// the user's energy applied, zeros elsewhere.
inline Eigen::VectorXcd assemble_user_vector(double e_k, const Pattern& q,
                                             const Eigen::VectorXcd& b) {
  if (!(e_k > 0.0)) throw ConfigError("assemble_user_vector: energy must be positive");
  if (b.size() != q.active_count())
    throw ConfigError("assemble_user_vector: symbol count mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(q.size());
  const double amp = std::sqrt(e_k);
  const std::vector<int>& a = q.active();
  for (std::size_t i = 0; i < a.size(); ++i)
    out(a[i]) = amp * b(static_cast<Eigen::Index>(i));
  return out;
}

}  // namespace gpsm
