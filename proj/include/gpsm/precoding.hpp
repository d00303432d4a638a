#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "gpsm/channel.hpp"
#include "gpsm/errors.hpp"
#include "gpsm/pattern_space.hpp"

namespace gpsm {

/// Channel-quality gate for zero forcing. A realization must pass both the
/// conditioning bound and the inversion residual; borderline matrices can pass
/// one and fail the other.
struct ZfOptions {
  double rcond_min = 1e-12;
  double residual_max = 1e-9;
};

/// Zero-forcing precoder P = H^H (H H^H)^{-1} plus the per-antenna column
/// energies g that drive power scaling and pattern-set selection.
struct ZfPrecoder {
  Eigen::MatrixXcd p;                  // n_t x (k_users * n_r)
  std::vector<std::vector<double>> g;  // g[k][i]: squared norm of user k's column i
  double rcond = 0.0;                  // 1-norm condition estimate of H H^H
  double residual = 0.0;               // || H P - I ||_F
  int k_users = 0;
  int n_r = 0;

  std::span<const double> user_g(int k) const {
    if (k < 0 || k >= k_users) throw ConfigError("ZfPrecoder: user index out of range");
    return g[static_cast<std::size_t>(k)];
  }
};

namespace detail {

inline double norm1(const Eigen::MatrixXcd& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace detail

/// Builds the zero-forcing precoder for one channel realization. Throws
/// NearSingularError when the Gram matrix fails the quality gate; callers in
/// Monte-Carlo loops catch it, count the rejection, and resample the channel.
inline ZfPrecoder zf_precoder(const ChannelRealization& ch, const ZfOptions& opt = {}) {
  const int rows = ch.k_users * ch.n_r;
  const Eigen::MatrixXcd gram = ch.h * ch.h.adjoint();
  Eigen::LLT<Eigen::MatrixXcd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NearSingularError("zf_precoder: Gram matrix not positive definite");
  const Eigen::MatrixXcd ginv =
      llt.solve(Eigen::MatrixXcd::Identity(rows, rows));

  ZfPrecoder zf;
  zf.k_users = ch.k_users;
  zf.n_r = ch.n_r;
  zf.rcond = 1.0 / (detail::norm1(gram) * detail::norm1(ginv));
  zf.p.noalias() = ch.h.adjoint() * ginv;
  zf.residual =
      (ch.h * zf.p - Eigen::MatrixXcd::Identity(rows, rows)).norm();
  if (zf.rcond < opt.rcond_min)
    throw NearSingularError("zf_precoder: rcond " + std::to_string(zf.rcond) +
                            " below gate " + std::to_string(opt.rcond_min));
  if (zf.residual > opt.residual_max)
    throw NearSingularError("zf_precoder: residual " + std::to_string(zf.residual) +
                            " above gate " + std::to_string(opt.residual_max));

  zf.g.assign(static_cast<std::size_t>(ch.k_users),
              std::vector<double>(static_cast<std::size_t>(ch.n_r), 0.0));
  for (int k = 0; k < ch.k_users; ++k)
    for (int i = 0; i < ch.n_r; ++i) {
      const int j = k * ch.n_r + i;
      // P^H P = (H H^H)^{-1}, so the diagonal of the inverse Gram matrix is
      // exactly the squared column norm of P.
      zf.g[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
          ginv(j, j).real();
    }
  return zf;
}

/// Squared column norms of P computed directly from the matrix; independent
/// route for cross-checking ZfPrecoder::g.
inline std::vector<std::vector<double>> column_energies(const ZfPrecoder& zf) {
  std::vector<std::vector<double>> g(
      static_cast<std::size_t>(zf.k_users),
      std::vector<double>(static_cast<std::size_t>(zf.n_r), 0.0));
  for (int k = 0; k < zf.k_users; ++k)
    for (int i = 0; i < zf.n_r; ++i)
      g[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] =
          zf.p.col(k * zf.n_r + i).squaredNorm();
  return g;
}

/// Power-normalization factor: gamma = sum_k eps_k * (g_k . qbar_k). Keeps the
/// expected transmit power at e_total when user k gets E_k = e_total eps_k / gamma.
inline double gamma_factor(const ZfPrecoder& zf,
                           std::span<const PatternSet> sets,
                           std::span<const double> eps) {
  if (static_cast<int>(sets.size()) != zf.k_users ||
      static_cast<int>(eps.size()) != zf.k_users)
    throw ConfigError("gamma_factor: need one pattern set and one weight per user");
  double gamma = 0.0;
  for (int k = 0; k < zf.k_users; ++k) {
    const std::vector<double>& qbar = sets[static_cast<std::size_t>(k)].mean();
    if (static_cast<int>(qbar.size()) != zf.n_r)
      throw ConfigError("gamma_factor: pattern set antenna count mismatch");
    double dot = 0.0;
    const std::span<const double> gk = zf.user_g(k);
    for (int i = 0; i < zf.n_r; ++i)
      dot += gk[static_cast<std::size_t>(i)] * qbar[static_cast<std::size_t>(i)];
    gamma += eps[static_cast<std::size_t>(k)] * dot;
  }
  return gamma;
}

inline double user_energy(double e_total, double eps_k, double gamma) {
  if (gamma <= 0.0) throw NumericError("user_energy: gamma must be positive");
  return e_total * eps_k / gamma;
}

/// s = P x for the stacked (already energy-scaled) user payload vector.
inline void transmit(const ZfPrecoder& zf, const Eigen::VectorXcd& stacked,
                     Eigen::VectorXcd& s) {
  if (stacked.size() != zf.p.cols())
    throw ConfigError("transmit: stacked payload length mismatch");
  s.noalias() = zf.p * stacked;
}

inline Eigen::VectorXcd transmit(const ZfPrecoder& zf, const Eigen::VectorXcd& stacked) {
  Eigen::VectorXcd s;
  transmit(zf, stacked, s);
  return s;
}

/// Precoder plus the per-user energies implied by one choice of pattern sets.
struct PrecoderBundle {
  ZfPrecoder precoder;
  double gamma = 0.0;
  std::vector<double> energy;  // E_k per user
};

inline PrecoderBundle make_precoder_bundle(const ChannelRealization& ch,
                                           std::span<const PatternSet> sets,
                                           std::span<const double> eps,
                                           double e_total = 1.0,
                                           const ZfOptions& opt = {}) {
  PrecoderBundle b;
  b.precoder = zf_precoder(ch, opt);
  b.gamma = gamma_factor(b.precoder, sets, eps);
  b.energy.resize(sets.size());
  for (std::size_t k = 0; k < sets.size(); ++k)
    b.energy[k] = user_energy(e_total, eps[k], b.gamma);
  return b;
}

}  // namespace gpsm
