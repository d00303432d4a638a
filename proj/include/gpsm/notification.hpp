#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gpsm/errors.hpp"
#include "gpsm/modem.hpp"
#include "gpsm/pattern_space.hpp"

namespace gpsm {

/// Layout of the pattern-set notification message. The chosen set index is
/// sent as plain bits on a pattern both ends know in advance (the
/// lexicographically first one), so no spatial bits are involved; the block is
/// repeated f times and the receiver combines the copies before deciding.
struct NotificationConfig {
  int f = 1;                  // repetition count
  std::uint64_t l = 1;        // candidate set count
  int bits_needed = 0;        // ceil(log2 l)
  int uses_per_copy = 0;      // channel uses holding one copy of the index
  Pattern known_pattern;      // a-priori agreed antenna pattern

  static NotificationConfig make(const PatternSpaceSpec& spec, int m, int f) {
    if (f < 1) throw ConfigError("NotificationConfig: repetition count must be >= 1");
    const Constellation c = Constellation::make(m);
    std::vector<int> first(static_cast<std::size_t>(spec.n_iba));
    for (int i = 0; i < spec.n_iba; ++i) first[static_cast<std::size_t>(i)] = i;
    NotificationConfig cfg{f, spec.l, ceil_log2(spec.l), 0,
                           Pattern(spec.n_r, std::move(first))};
    const int bits_per_use = spec.n_iba * c.bits_per_symbol();
    cfg.uses_per_copy = (cfg.bits_needed + bits_per_use - 1) / bits_per_use;
    return cfg;
  }

  int block_length() const { return f * uses_per_copy; }

 private:
  NotificationConfig(int f_in, std::uint64_t l_in, int bits, int uses, Pattern p)
      : f(f_in), l(l_in), bits_needed(bits), uses_per_copy(uses),
        known_pattern(std::move(p)) {}
};

/// Transmit payload for one notification: f * uses_per_copy dense vectors of
/// length n_r, sqrt(e_k)-scaled constellation points on the known pattern and
/// zeros elsewhere. The set index is spelled MSB first; the tail of the copy
/// is zero-padded bits. Copy c occupies block indices [c * uses_per_copy, ...).
inline std::vector<Eigen::VectorXcd> encode_notification(std::uint64_t set_index,
                                                         const NotificationConfig& cfg,
                                                         const Constellation& c,
                                                         double e_k) {
  if (set_index >= cfg.l)
    throw ConfigError("encode_notification: set index " + std::to_string(set_index) +
                      " out of range, L=" + std::to_string(cfg.l));
  const int n_iba = cfg.known_pattern.active_count();
  const int bps = c.bits_per_symbol();
  const double amp = std::sqrt(e_k > 0.0 ? e_k : 0.0);
  std::vector<int> bits(static_cast<std::size_t>(cfg.uses_per_copy) *
                            static_cast<std::size_t>(n_iba * bps),
                        0);
  for (int i = 0; i < cfg.bits_needed; ++i)
    bits[static_cast<std::size_t>(i)] =
        static_cast<int>((set_index >> (cfg.bits_needed - 1 - i)) & 1u);

  std::vector<Eigen::VectorXcd> copy(static_cast<std::size_t>(cfg.uses_per_copy));
  const std::vector<int>& act = cfg.known_pattern.active();
  std::size_t pos = 0;
  for (auto& v : copy) {
    v = Eigen::VectorXcd::Zero(cfg.known_pattern.size());
    for (int a : act) {
      std::uint32_t label = 0;
      for (int b = 0; b < bps; ++b)
        label = (label << 1) | static_cast<std::uint32_t>(bits[pos++]);
      v(a) = amp * c.point(label);
    }
  }

  std::vector<Eigen::VectorXcd> block;
  block.reserve(static_cast<std::size_t>(cfg.block_length()));
  for (int rep = 0; rep < cfg.f; ++rep)
    for (const auto& v : copy) block.push_back(v);
  return block;
}

struct NotificationDecode {
  std::uint64_t index = 0;
  bool valid = true;  // false: decoded value names no candidate set
};

/// Decodes a received notification block of f * uses_per_copy vectors. The f
/// copies of each channel use are summed first, so the useful amplitude grows
/// f-fold (energy f^2 e_k) while the noise variance only grows f-fold: the
/// combined decision runs at f times the single-copy SNR. A decoded value at
/// or beyond l is flagged invalid; the caller keeps the previously agreed set.
inline NotificationDecode decode_notification(const std::vector<Eigen::VectorXcd>& received,
                                              const NotificationConfig& cfg,
                                              const Constellation& c, double e_k) {
  if (static_cast<int>(received.size()) != cfg.block_length())
    throw ConfigError("decode_notification: expected " +
                      std::to_string(cfg.block_length()) + " channel uses, got " +
                      std::to_string(received.size()));
  const int n_r = cfg.known_pattern.size();
  const std::vector<int>& act = cfg.known_pattern.active();
  const int bps = c.bits_per_symbol();
  const double scale =
      static_cast<double>(cfg.f) * std::sqrt(e_k > 0.0 ? e_k : 0.0);
  const std::vector<cd>& pts = c.points();

  std::vector<int> bits;
  bits.reserve(static_cast<std::size_t>(cfg.uses_per_copy) * act.size() *
               static_cast<std::size_t>(bps));
  Eigen::VectorXcd summed(n_r);
  for (int u = 0; u < cfg.uses_per_copy; ++u) {
    summed.setZero();
    for (int rep = 0; rep < cfg.f; ++rep) {
      const Eigen::VectorXcd& y =
          received[static_cast<std::size_t>(rep * cfg.uses_per_copy + u)];
      if (y.size() != n_r)
        throw ConfigError("decode_notification: receive vector length mismatch");
      summed += y;
    }
    for (int a : act) {
      const cd yi = summed(a);
      std::uint32_t bl = 0;
      double bd = std::norm(yi - scale * pts[0]);
      for (std::uint32_t l = 1; l < pts.size(); ++l) {
        const double d = std::norm(yi - scale * pts[l]);
        if (d < bd) {
          bd = d;
          bl = l;
        }
      }
      for (int b = bps - 1; b >= 0; --b)
        bits.push_back(static_cast<int>((bl >> b) & 1u));
    }
  }

  NotificationDecode out;
  for (int i = 0; i < cfg.bits_needed; ++i)
    out.index =
        (out.index << 1) | static_cast<std::uint64_t>(bits[static_cast<std::size_t>(i)]);
  out.valid = out.index < cfg.l;
  return out;
}

}  // namespace gpsm
