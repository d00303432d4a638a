#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gpsm/channel.hpp"
#include "gpsm/precoding.hpp"
#include "gpsm/rng.hpp"

using namespace gpsm;

namespace {

ChannelRealization manual_channel(Eigen::MatrixXcd h, int k_users, int n_r) {
  ChannelRealization ch;
  ch.k_users = k_users;
  ch.n_r = n_r;
  ch.n_t = static_cast<int>(h.cols());
  ch.h = std::move(h);
  return ch;
}

ChannelRealization accepted_channel(int k_users, int n_r, int n_t, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    ChannelRealization ch = draw_channel(k_users, n_r, n_t, rng);
    try {
      zf_precoder(ch);
      return ch;
    } catch (const NearSingularError&) {
    }
  }
  throw std::runtime_error("no acceptable channel in 100 draws");
}

}  // namespace

TEST_CASE("identity channel gives an identity precoder") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(4, 8);
  h.leftCols(4) = Eigen::MatrixXcd::Identity(4, 4);
  const ZfPrecoder zf = zf_precoder(manual_channel(h, 1, 4));
  Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(8, 4);
  expected.topRows(4) = Eigen::MatrixXcd::Identity(4, 4);
  REQUIRE((zf.p - expected).norm() < 1e-14);
  REQUIRE(zf.residual < 1e-14);
  REQUIRE_THAT(zf.rcond, Catch::Matchers::WithinRel(1.0, 1e-12));
  for (double gi : zf.user_g(0)) REQUIRE_THAT(gi, Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("unitary channel inverts to its adjoint") {
  Rng rng(31);
  Eigen::MatrixXcd a(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = rng.cgaussian();
  const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
  const ZfPrecoder zf = zf_precoder(manual_channel(q, 1, 4));
  REQUIRE((zf.p - q.adjoint()).norm() < 1e-12);
  REQUIRE(zf.residual < 1e-12);
}

TEST_CASE("accepted channels satisfy the inversion gates") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const ChannelRealization ch = accepted_channel(2, 4, 8, rng);
    const ZfPrecoder zf = zf_precoder(ch);
    REQUIRE(zf.residual < 1e-9);
    REQUIRE(zf.rcond >= 1e-12);
    REQUIRE((ch.h * zf.p - Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-9);
  }
}

TEST_CASE("column energies from the inverse Gram match direct column norms") {
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const ChannelRealization ch = accepted_channel(2, 4, 9, rng);
    const ZfPrecoder zf = zf_precoder(ch);
    const std::vector<std::vector<double>> direct = column_energies(zf);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 4; ++i) {
        const double a = zf.g[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        const double b = direct[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        REQUIRE_THAT(a, Catch::Matchers::WithinRel(b, 1e-10));
      }
  }
}

TEST_CASE("near-singular channels are rejected") {
  Rng rng(60);
  ChannelRealization ch = draw_channel(1, 4, 8, rng);
  ch.h.row(1) = ch.h.row(0) * (1.0 + 1e-13);
  REQUIRE_THROWS_AS(zf_precoder(ch), NearSingularError);
}

TEST_CASE("gamma for unit column energies is the active-antenna count") {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(4, 8);
  h.leftCols(4) = Eigen::MatrixXcd::Identity(4, 4);
  const ZfPrecoder zf = zf_precoder(manual_channel(h, 1, 4));
  const PatternSpaceSpec spec(4, 2);
  const std::vector<PatternSet> sets = {pattern_set_from_index(spec, 0)};
  const std::vector<double> eps = {1.0};
  REQUIRE(gamma_factor(zf, sets, eps) == 2.0);
}

TEST_CASE("gamma adds per-user contributions") {
  Rng rng(61);
  const ChannelRealization ch = accepted_channel(2, 4, 8, rng);
  const ZfPrecoder zf = zf_precoder(ch);
  const PatternSpaceSpec spec(4, 2);
  const std::vector<PatternSet> sets = {pattern_set_from_index(spec, 3),
                                        pattern_set_from_index(spec, 11)};
  const std::vector<double> eps = {1.2, 0.8};
  double expected = 0.0;
  for (int k = 0; k < 2; ++k) {
    double dot = 0.0;
    const std::span<const double> gk = zf.user_g(k);
    const std::vector<double>& qbar = sets[static_cast<std::size_t>(k)].mean();
    for (int i = 0; i < 4; ++i)
      dot += gk[static_cast<std::size_t>(i)] * qbar[static_cast<std::size_t>(i)];
    expected += eps[static_cast<std::size_t>(k)] * dot;
  }
  REQUIRE_THAT(gamma_factor(zf, sets, eps), Catch::Matchers::WithinRel(expected, 1e-14));

  const std::vector<PatternSet> one_set = {sets[0]};
  REQUIRE_THROWS_AS(gamma_factor(zf, one_set, eps), ConfigError);
}

TEST_CASE("user_energy implements E_k = E_T eps_k / gamma") {
  REQUIRE(user_energy(1.0, 1.0, 2.0) == 0.5);
  REQUIRE(user_energy(2.0, 0.5, 4.0) == 0.25);
  REQUIRE_THROWS_AS(user_energy(1.0, 1.0, 0.0), NumericError);
  REQUIRE_THROWS_AS(user_energy(1.0, 1.0, -1.0), NumericError);
}

TEST_CASE("energy allocation restores the total power budget") {
  Rng rng(62);
  const PatternSpaceSpec spec(4, 2);
  const std::vector<double> eps = {1.2, 0.8};
  for (int trial = 0; trial < 50; ++trial) {
    const ChannelRealization ch = accepted_channel(2, 4, 8, rng);
    const ZfPrecoder zf = zf_precoder(ch);
    const std::vector<PatternSet> sets = {pattern_set_from_index(spec, 1),
                                          pattern_set_from_index(spec, 14)};
    const double gamma = gamma_factor(zf, sets, eps);
    double recovered = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double e_k = user_energy(1.0, eps[static_cast<std::size_t>(k)], gamma);
      double dot = 0.0;
      const std::span<const double> gk = zf.user_g(k);
      const std::vector<double>& qbar = sets[static_cast<std::size_t>(k)].mean();
      for (int i = 0; i < 4; ++i)
        dot += gk[static_cast<std::size_t>(i)] * qbar[static_cast<std::size_t>(i)];
      recovered += e_k * dot;
    }
    REQUIRE_THAT(recovered, Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("transmit is the precoder applied to the stacked payload") {
  Rng rng(63);
  const ChannelRealization ch = accepted_channel(2, 4, 8, rng);
  const ZfPrecoder zf = zf_precoder(ch);

  Eigen::VectorXcd stacked(8);
  for (Eigen::Index i = 0; i < 8; ++i) stacked(i) = rng.cgaussian();
  const Eigen::VectorXcd s = transmit(zf, stacked);
  REQUIRE(s.size() == 8);

  // Per-user block decomposition: s = sum_k P_k x_k.
  Eigen::VectorXcd blockwise = Eigen::VectorXcd::Zero(8);
  for (int k = 0; k < 2; ++k)
    blockwise += zf.p.middleCols(4 * k, 4) * stacked.segment(4 * k, 4);
  REQUIRE((s - blockwise).norm() < 1e-12);

  // Zero forcing: the channel undoes the precoder up to the residual gate.
  REQUIRE((ch.h * s - stacked).norm() < 1e-9 * stacked.norm() + 1e-12);

  REQUIRE(transmit(zf, Eigen::VectorXcd::Zero(8)).norm() == 0.0);
  REQUIRE_THROWS_AS(transmit(zf, Eigen::VectorXcd::Zero(7)), ConfigError);
}

TEST_CASE("make_precoder_bundle packages precoder, gamma and energies") {
  Rng rng(64);
  const ChannelRealization ch = accepted_channel(2, 4, 8, rng);
  const PatternSpaceSpec spec(4, 2);
  const std::vector<PatternSet> sets = {pattern_set_from_index(spec, 0),
                                        pattern_set_from_index(spec, 7)};
  const std::vector<double> eps = {1.0, 1.0};
  const PrecoderBundle b = make_precoder_bundle(ch, sets, eps, 1.0);
  const ZfPrecoder ref = zf_precoder(ch);
  REQUIRE((b.precoder.p - ref.p).norm() == 0.0);
  REQUIRE(b.gamma == gamma_factor(ref, sets, eps));
  REQUIRE(b.energy.size() == 2);
  for (int k = 0; k < 2; ++k)
    REQUIRE(b.energy[static_cast<std::size_t>(k)] ==
            user_energy(1.0, eps[static_cast<std::size_t>(k)], b.gamma));
}
