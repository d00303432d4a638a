#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "gpsm/channel.hpp"
#include "gpsm/rng.hpp"

using namespace gpsm;

TEST_CASE("draw_channel validates dimensions") {
  Rng rng(1);
  REQUIRE_THROWS_AS(draw_channel(2, 4, 7, rng), ConfigError);  // n_t < K*n_r
  REQUIRE_THROWS_AS(draw_channel(0, 4, 8, rng), ConfigError);
  REQUIRE_NOTHROW(draw_channel(2, 4, 8, rng));
}

TEST_CASE("draw_channel is deterministic in the seed") {
  Rng a(42), b(42);
  const ChannelRealization ha = draw_channel(2, 4, 8, a);
  const ChannelRealization hb = draw_channel(2, 4, 8, b);
  REQUIRE((ha.h - hb.h).norm() == 0.0);
  Rng c(43);
  const ChannelRealization hc = draw_channel(2, 4, 8, c);
  REQUIRE((ha.h - hc.h).norm() > 0.0);
}

TEST_CASE("channel entries are unit-variance circular Gaussian") {
  Rng rng(2026);
  double sum_norm = 0.0, sum_re = 0.0, sum_im = 0.0, sum_re2 = 0.0, sum_im2 = 0.0;
  std::int64_t n = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ChannelRealization ch = draw_channel(2, 10, 20, rng);
    for (Eigen::Index i = 0; i < ch.h.rows(); ++i)
      for (Eigen::Index j = 0; j < ch.h.cols(); ++j) {
        const std::complex<double> v = ch.h(i, j);
        sum_norm += std::norm(v);
        sum_re += v.real();
        sum_im += v.imag();
        sum_re2 += v.real() * v.real();
        sum_im2 += v.imag() * v.imag();
        ++n;
      }
  }
  const double inv = 1.0 / static_cast<double>(n);
  REQUIRE_THAT(sum_norm * inv, Catch::Matchers::WithinAbs(1.0, 0.01));
  REQUIRE_THAT(sum_re * inv, Catch::Matchers::WithinAbs(0.0, 0.01));
  REQUIRE_THAT(sum_im * inv, Catch::Matchers::WithinAbs(0.0, 0.01));
  REQUIRE_THAT(sum_re2 * inv, Catch::Matchers::WithinAbs(0.5, 0.01));
  REQUIRE_THAT(sum_im2 * inv, Catch::Matchers::WithinAbs(0.5, 0.01));
}

TEST_CASE("user_block addresses contiguous receive rows") {
  Rng rng(7);
  const ChannelRealization ch = draw_channel(3, 2, 6, rng);
  REQUIRE(ch.h.rows() == 6);
  REQUIRE(ch.h.cols() == 6);
  for (int k = 0; k < 3; ++k) {
    const Eigen::MatrixXcd block = ch.user_block(k);
    REQUIRE(block.rows() == 2);
    REQUIRE(block.cols() == 6);
    REQUIRE((block - ch.h.middleRows(2 * k, 2)).norm() == 0.0);
  }
  REQUIRE_THROWS_AS(ch.user_block(3), ConfigError);
  REQUIRE_THROWS_AS(ch.user_block(-1), ConfigError);
}

TEST_CASE("propagate with zero noise is exact") {
  Rng rng(8);
  const ChannelRealization ch = draw_channel(1, 4, 8, rng);
  Eigen::VectorXcd s = Eigen::VectorXcd::Zero(8);
  s(0) = std::complex<double>{1.0, -1.0};
  s(5) = std::complex<double>{-0.5, 2.0};
  Rng noise_rng(9);
  const Eigen::VectorXcd y = propagate(ch, s, NoiseSpec{0.0}, noise_rng);
  REQUIRE((y - ch.h * s).norm() == 0.0);
  // Drawing nothing: the noise stream is untouched.
  Rng ref(9);
  REQUIRE(noise_rng.next_u64() == ref.next_u64());
}

TEST_CASE("propagate adds noise of the requested variance") {
  Rng rng(10);
  const ChannelRealization ch = draw_channel(1, 4, 8, rng);
  const Eigen::VectorXcd s = Eigen::VectorXcd::Zero(8);
  const double sigma2 = 0.37;
  Rng noise_rng(11);
  double acc = 0.0;
  const int trials = 50000;
  for (int t = 0; t < trials; ++t)
    acc += propagate(ch, s, NoiseSpec{sigma2}, noise_rng).squaredNorm();
  const double per_entry = acc / (4.0 * trials);
  REQUIRE_THAT(per_entry, Catch::Matchers::WithinRel(sigma2, 0.01));
}

TEST_CASE("propagate validates the signal length") {
  Rng rng(12);
  const ChannelRealization ch = draw_channel(1, 4, 8, rng);
  Rng noise_rng(13);
  REQUIRE_THROWS_AS(propagate(ch, Eigen::VectorXcd::Zero(7), NoiseSpec{0.0}, noise_rng),
                    ConfigError);
  REQUIRE_THROWS_AS(propagate(ch, Eigen::VectorXcd::Zero(8), NoiseSpec{-1.0}, noise_rng),
                    ConfigError);
}
