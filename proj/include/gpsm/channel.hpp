#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "gpsm/errors.hpp"
#include "gpsm/rng.hpp"

namespace gpsm {

/// Flat-fading downlink channel for k_users receivers with n_r antennas each,
/// fed by n_t transmit antennas. h stacks the per-user blocks row-wise, so
/// user k owns rows [k * n_r, (k + 1) * n_r).
struct ChannelRealization {
  Eigen::MatrixXcd h;
  int k_users = 0;
  int n_r = 0;
  int n_t = 0;

  Eigen::Block<const Eigen::MatrixXcd> user_block(int k) const {
    if (k < 0 || k >= k_users)
      throw ConfigError("ChannelRealization: user index out of range");
    return h.block(k * n_r, 0, n_r, n_t);
  }
};

/// i.i.d. CN(0,1) Rayleigh channel. Entries fill row-major so the realization
/// is reproducible for a given rng state regardless of matrix storage order.
inline ChannelRealization draw_channel(int k_users, int n_r, int n_t, Rng& rng) {
  if (k_users < 1 || n_r < 1 || n_t < 1)
    throw ConfigError("draw_channel: dimensions must be positive");
  const int rows = k_users * n_r;
  if (n_t < rows)
    throw ConfigError("draw_channel: need n_t >= k_users * n_r for zero forcing, got n_t=" +
                      std::to_string(n_t) + " < " + std::to_string(rows));
  ChannelRealization ch;
  ch.k_users = k_users;
  ch.n_r = n_r;
  ch.n_t = n_t;
  ch.h.resize(rows, n_t);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < n_t; ++c) ch.h(r, c) = rng.cgaussian();
  return ch;
}

/// Receiver-side additive noise level. sigma2 == 0 models the noise-free
/// sanity regime and draws nothing from the rng.
struct NoiseSpec {
  double sigma2 = 0.0;
};

/// y = H x + w with w ~ CN(0, sigma2 I). Writes into y (resized).
inline void propagate(const ChannelRealization& ch, const Eigen::VectorXcd& x,
                      const NoiseSpec& noise, Rng& rng, Eigen::VectorXcd& y) {
  if (x.size() != ch.n_t) throw ConfigError("propagate: transmit vector length mismatch");
  if (noise.sigma2 < 0.0) throw ConfigError("propagate: noise variance must be nonnegative");
  y.noalias() = ch.h * x;
  if (noise.sigma2 > 0.0) {
    const double scale = std::sqrt(noise.sigma2);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += scale * rng.cgaussian();
  }
}

inline Eigen::VectorXcd propagate(const ChannelRealization& ch, const Eigen::VectorXcd& x,
                                  const NoiseSpec& noise, Rng& rng) {
  Eigen::VectorXcd y;
  propagate(ch, x, noise, rng, y);
  return y;
}

}  // namespace gpsm
