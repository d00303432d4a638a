#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gpsm/notification.hpp"
#include "gpsm/rng.hpp"

using namespace gpsm;

namespace {

void add_noise(std::vector<Eigen::VectorXcd>& block, double sigma2, Rng& rng) {
  const double s = std::sqrt(sigma2);
  for (Eigen::VectorXcd& v : block)
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += s * rng.cgaussian();
}

}  // namespace

TEST_CASE("notification layout for the reference spaces") {
  const Constellation qpsk = Constellation::make(4);

  const NotificationConfig c42 = NotificationConfig::make(PatternSpaceSpec(4, 2), 4, 10);
  REQUIRE(c42.l == 15);
  REQUIRE(c42.bits_needed == 4);
  REQUIRE(c42.uses_per_copy == 1);  // 2 antennas x 2 bits fit all 4 index bits
  REQUIRE(c42.block_length() == 10);
  REQUIRE(c42.known_pattern.active() == std::vector<int>{0, 1});

  const NotificationConfig c52 = NotificationConfig::make(PatternSpaceSpec(5, 2), 4, 2);
  REQUIRE(c52.l == 45);
  REQUIRE(c52.bits_needed == 6);
  REQUIRE(c52.uses_per_copy == 2);  // 6 bits over 4 per use, 2 bits padded
  REQUIRE(c52.block_length() == 4);
  REQUIRE(c52.known_pattern.active() == std::vector<int>{0, 1});

  const NotificationConfig c51 = NotificationConfig::make(PatternSpaceSpec(5, 1), 4, 1);
  REQUIRE(c51.l == 5);
  REQUIRE(c51.bits_needed == 3);
  REQUIRE(c51.uses_per_copy == 2);  // 2 bits per use, 1 bit padded
  REQUIRE(c51.known_pattern.active() == std::vector<int>{0});

  // A one-candidate space needs no message at all.
  const NotificationConfig c44 = NotificationConfig::make(PatternSpaceSpec(4, 4), 4, 3);
  REQUIRE(c44.l == 1);
  REQUIRE(c44.bits_needed == 0);
  REQUIRE(c44.uses_per_copy == 0);
  REQUIRE(c44.block_length() == 0);

  REQUIRE_THROWS_AS(NotificationConfig::make(PatternSpaceSpec(4, 2), 4, 0), ConfigError);
}

TEST_CASE("encode places the index bits on the agreed pattern") {
  const Constellation qpsk = Constellation::make(4);
  const NotificationConfig cfg = NotificationConfig::make(PatternSpaceSpec(4, 2), 4, 3);
  const double e_k = 0.49;
  const double amp = std::sqrt(e_k);

  const std::vector<Eigen::VectorXcd> zero_block = encode_notification(0, cfg, qpsk, e_k);
  REQUIRE(zero_block.size() == 3);
  for (const Eigen::VectorXcd& v : zero_block) {
    REQUIRE(v.size() == 4);
    REQUIRE(v(0) == amp * qpsk.point(0));
    REQUIRE(v(1) == amp * qpsk.point(0));
    REQUIRE(v(2) == cd{0.0, 0.0});
    REQUIRE(v(3) == cd{0.0, 0.0});
    REQUIRE_THAT(v.squaredNorm(), Catch::Matchers::WithinRel(2.0 * e_k, 1e-12));
  }

  // Index 9 = 1001: antenna 0 carries bits 10 (label 2), antenna 1 bits 01.
  const std::vector<Eigen::VectorXcd> block9 = encode_notification(9, cfg, qpsk, e_k);
  for (const Eigen::VectorXcd& v : block9) {
    REQUIRE(v(0) == amp * qpsk.point(2));
    REQUIRE(v(1) == amp * qpsk.point(1));
  }

  REQUIRE_THROWS_AS(encode_notification(15, cfg, qpsk, e_k), ConfigError);
}

TEST_CASE("noise-free notification round-trips every index") {
  const Constellation qpsk = Constellation::make(4);
  for (int f : {1, 3}) {
    const NotificationConfig cfg =
        NotificationConfig::make(PatternSpaceSpec(4, 2), 4, f);
    for (std::uint64_t i = 0; i < cfg.l; ++i) {
      const NotificationDecode d =
          decode_notification(encode_notification(i, cfg, qpsk, 0.81), cfg, qpsk, 0.81);
      REQUIRE(d.valid);
      REQUIRE(d.index == i);
    }
  }
  const NotificationConfig c52 = NotificationConfig::make(PatternSpaceSpec(5, 2), 4, 2);
  for (std::uint64_t i = 0; i < c52.l; ++i) {
    const NotificationDecode d =
        decode_notification(encode_notification(i, c52, qpsk, 1.7), c52, qpsk, 1.7);
    REQUIRE(d.valid);
    REQUIRE(d.index == i);
  }
}

TEST_CASE("decoded values beyond the candidate count are flagged invalid") {
  const Constellation qpsk = Constellation::make(4);
  const NotificationConfig cfg = NotificationConfig::make(PatternSpaceSpec(5, 2), 4, 1);
  REQUIRE(cfg.bits_needed == 6);
  REQUIRE(cfg.uses_per_copy == 2);

  // All active antennas carry label 3 in both uses: the index bits read as
  // 111111 = 63, past the 45 candidate sets.
  std::vector<Eigen::VectorXcd> block(2, Eigen::VectorXcd::Zero(5));
  for (Eigen::VectorXcd& v : block) {
    v(0) = qpsk.point(3);
    v(1) = qpsk.point(3);
  }
  const NotificationDecode d = decode_notification(block, cfg, qpsk, 1.0);
  REQUIRE_FALSE(d.valid);
  REQUIRE(d.index == 63);
}

TEST_CASE("decode validates the block shape") {
  const Constellation qpsk = Constellation::make(4);
  const NotificationConfig cfg = NotificationConfig::make(PatternSpaceSpec(4, 2), 4, 2);
  std::vector<Eigen::VectorXcd> short_block(1, Eigen::VectorXcd::Zero(4));
  REQUIRE_THROWS_AS(decode_notification(short_block, cfg, qpsk, 1.0), ConfigError);
  std::vector<Eigen::VectorXcd> bad_rows(2, Eigen::VectorXcd::Zero(3));
  REQUIRE_THROWS_AS(decode_notification(bad_rows, cfg, qpsk, 1.0), ConfigError);
}

TEST_CASE("repetition combining beats single-copy decoding in noise") {
  const Constellation qpsk = Constellation::make(4);
  const PatternSpaceSpec spec(4, 2);
  const NotificationConfig f1 = NotificationConfig::make(spec, 4, 1);
  const NotificationConfig f10 = NotificationConfig::make(spec, 4, 10);
  const double e_k = 1.0;
  const double sigma2 = 1.0;

  Rng rng(31337);
  int errors_f1 = 0, errors_f10 = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t index = rng.below(f1.l);
    std::vector<Eigen::VectorXcd> b1 = encode_notification(index, f1, qpsk, e_k);
    add_noise(b1, sigma2, rng);
    if (decode_notification(b1, f1, qpsk, e_k).index != index) ++errors_f1;

    std::vector<Eigen::VectorXcd> b10 = encode_notification(index, f10, qpsk, e_k);
    add_noise(b10, sigma2, rng);
    if (decode_notification(b10, f10, qpsk, e_k).index != index) ++errors_f10;
  }
  // Component SNR 1 per copy: roughly half the 4-bit indices break with one
  // copy, while ten summed copies push the bit error rate under 1e-3.
  REQUIRE(errors_f1 > trials / 5);
  REQUIRE(errors_f10 < 30);
  REQUIRE(errors_f10 * 10 < errors_f1);
}

TEST_CASE("empty messages decode to the only candidate") {
  const Constellation qpsk = Constellation::make(4);
  const NotificationConfig cfg = NotificationConfig::make(PatternSpaceSpec(4, 4), 4, 2);
  const std::vector<Eigen::VectorXcd> block = encode_notification(0, cfg, qpsk, 1.0);
  REQUIRE(block.empty());
  const NotificationDecode d = decode_notification(block, cfg, qpsk, 1.0);
  REQUIRE(d.valid);
  REQUIRE(d.index == 0);
}
