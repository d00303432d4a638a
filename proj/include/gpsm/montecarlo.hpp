#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gpsm/channel.hpp"
#include "gpsm/detector.hpp"
#include "gpsm/errors.hpp"
#include "gpsm/modem.hpp"
#include "gpsm/notification.hpp"
#include "gpsm/pattern_space.hpp"
#include "gpsm/precoding.hpp"
#include "gpsm/rng.hpp"

namespace gpsm {

enum class PatternSelection { fixed, random, optimized, optimized_notified };

inline const char* to_string(PatternSelection k) {
  switch (k) {
    case PatternSelection::fixed: return "fixed";
    case PatternSelection::random: return "random";
    case PatternSelection::optimized: return "optimized";
    case PatternSelection::optimized_notified: return "optimized_notified";
  }
  throw ConfigError("to_string: bad PatternSelection value");
}

inline PatternSelection pattern_selection_from_string(const std::string& s) {
  if (s == "fixed") return PatternSelection::fixed;
  if (s == "random") return PatternSelection::random;
  if (s == "optimized") return PatternSelection::optimized;
  if (s == "optimized_notified") return PatternSelection::optimized_notified;
  throw ConfigError("unknown pattern policy '" + s +
                    "' (expected fixed | random | optimized | optimized_notified)");
}

/// How each user's pattern set is chosen per channel realization.
struct PatternPolicy {
  PatternSelection kind = PatternSelection::random;
  std::uint64_t fixed_set_index = 0;  // used by kind == fixed
  int repetitions = 1;                // notification copies, kind == optimized_notified
};

/// When the freshly optimized set takes effect. same_frame: the set chosen
/// for a frame's channel is notified and used within that frame. pipelined:
/// the choice is applied one frame later, so frame r runs on the set chosen
/// for frame r-1 (frame 0 runs on set 0 at both ends).
enum class NotificationTiming { same_frame, pipelined };

inline const char* to_string(NotificationTiming t) {
  return t == NotificationTiming::same_frame ? "same_frame" : "pipelined";
}

inline NotificationTiming notification_timing_from_string(const std::string& s) {
  if (s == "same_frame") return NotificationTiming::same_frame;
  if (s == "pipelined") return NotificationTiming::pipelined;
  throw ConfigError("unknown notification timing '" + s +
                    "' (expected same_frame | pipelined)");
}

struct SimScenario {
  int k_users = 1;
  int n_t = 8;
  int n_r = 4;
  int n_iba = 2;
  int m = 4;                      // constellation order
  std::vector<double> eps;        // per-user energy fractions; empty = all 1
  std::vector<double> snr_grid_db;
  int channel_realizations = 1000;
  int vectors_per_frame = 3200;
  PatternPolicy policy;
  NotificationTiming timing = NotificationTiming::same_frame;
  std::uint64_t master_seed = 1;
  double e_total = 1.0;
  ZfOptions zf;
  std::uint64_t enumeration_cap = 1'000'000;
  int max_resamples = 1000;  // channel redraws tolerated per realization

  std::vector<double> eps_or_default() const {
    if (eps.empty()) return std::vector<double>(static_cast<std::size_t>(k_users), 1.0);
    return eps;
  }

  void validate() const {
    if (k_users < 1) throw ConfigError("scenario: users must be >= 1");
    if (n_r < 1) throw ConfigError("scenario: rx_antennas must be >= 1");
    if (n_iba < 1 || n_iba > n_r)
      throw ConfigError("scenario: iba must satisfy 1 <= iba <= rx_antennas");
    if (n_t < k_users * n_r)
      throw ConfigError("scenario: tx_antennas (" + std::to_string(n_t) +
                        ") must be >= users * rx_antennas (" +
                        std::to_string(k_users * n_r) + ")");
    if (m != 2 && m != 4)
      throw ConfigError("scenario: modulation order must be 2 or 4");
    if (!eps.empty()) {
      if (static_cast<int>(eps.size()) != k_users)
        throw ConfigError("scenario: eps needs one entry per user");
      double sum = 0.0;
      for (double e : eps) {
        if (!(e > 0.0)) throw ConfigError("scenario: eps entries must be positive");
        sum += e;
      }
      if (std::abs(sum / static_cast<double>(k_users) - 1.0) > 1e-9)
        throw ConfigError("scenario: eps must average to 1 across users");
    }
    if (snr_grid_db.empty()) throw ConfigError("scenario: snr_db grid must be nonempty");
    if (channel_realizations < 1)
      throw ConfigError("scenario: realizations must be >= 1");
    if (vectors_per_frame < 1)
      throw ConfigError("scenario: vectors_per_frame must be >= 1");
    if (e_total <= 0.0) throw ConfigError("scenario: total energy must be positive");
    if (policy.repetitions < 1)
      throw ConfigError("scenario: repetitions must be >= 1");
    const PatternSpaceSpec spec(n_r, n_iba);
    if (policy.kind == PatternSelection::fixed && policy.fixed_set_index >= spec.l)
      throw ConfigError("scenario: fixed set index " +
                        std::to_string(policy.fixed_set_index) + " out of range, L=" +
                        std::to_string(spec.l));
  }
};

/// One SNR point of a BER curve. The schema fields are what the CSV/JSON
/// emitters persist; the realization_* vectors are in-memory diagnostics.
struct BerRecord {
  double snr_db = 0.0;
  double ber = 0.0;
  std::uint64_t bits_sent = 0;
  std::uint64_t bit_errors = 0;
  std::uint64_t spatial_bit_errors = 0;
  std::uint64_t symbol_bit_errors = 0;
  std::vector<double> per_user_ber;
  std::uint64_t notification_failures = 0;
  std::uint64_t rejected_channels = 0;

  double ber_stderr = 0.0;
  std::vector<double> realization_ber;
  std::vector<double> realization_tx_energy;  // mean ||s||^2 per channel use
};

/// sigma_n^2 = e_t / 10^(snr_db/10); snr_db = +infinity is the noise-free
/// sentinel and maps to exactly zero.
inline double sigma_from_snr(double e_t, double snr_db) {
  if (e_t <= 0.0) throw ConfigError("sigma_from_snr: e_t must be positive");
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  return e_t * std::pow(10.0, -snr_db / 10.0);
}

/// Runs fn(0) ... fn(n-1) on up to `workers` threads. Indices are handed out
/// by an atomic counter; fn must only write to per-index state, which keeps
/// the outcome identical for any worker count. The first exception is
/// rethrown after all threads join.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (workers <= 0) {
    const unsigned hc = std::thread::hardware_concurrency();
    workers = hc == 0 ? 1 : static_cast<int>(hc);
  }
  const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (nw <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

/// Frame-independent state prepared per realization: accepted channel, its
/// precoder, and the pattern sets the transmitter would pick for it.
struct RealizationSetup {
  ChannelRealization ch;
  ZfPrecoder zf;
  std::vector<PatternSet> chosen;         // per user
  std::vector<std::uint64_t> chosen_idx;  // canonical index per user
  std::uint64_t rejected = 0;
};

struct RealizationCounts {
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  std::uint64_t spatial_errors = 0;
  std::uint64_t symbol_errors = 0;
  std::vector<std::uint64_t> user_bits;
  std::vector<std::uint64_t> user_errors;
  double tx_energy_mean = 0.0;
};

inline RealizationSetup prepare_realization(const SimScenario& sc,
                                            const PatternSpaceSpec& spec,
                                            std::size_t r) {
  RealizationSetup out;
  Rng rng_ch(derive_seed(sc.master_seed, Stream::channel, r));
  for (int attempt = 0;; ++attempt) {
    if (attempt > sc.max_resamples)
      throw NumericError("run_ber_point: exceeded " +
                         std::to_string(sc.max_resamples) +
                         " channel resamples in one realization");
    out.ch = draw_channel(sc.k_users, sc.n_r, sc.n_t, rng_ch);
    try {
      out.zf = zf_precoder(out.ch, sc.zf);
      break;
    } catch (const NearSingularError&) {
      ++out.rejected;
    }
  }

  out.chosen.reserve(static_cast<std::size_t>(sc.k_users));
  out.chosen_idx.reserve(static_cast<std::size_t>(sc.k_users));
  switch (sc.policy.kind) {
    case PatternSelection::fixed:
      for (int k = 0; k < sc.k_users; ++k) {
        out.chosen.push_back(pattern_set_from_index(spec, sc.policy.fixed_set_index));
        out.chosen_idx.push_back(sc.policy.fixed_set_index);
      }
      break;
    case PatternSelection::random: {
      Rng rng_pat(derive_seed(sc.master_seed, Stream::pattern_draw, r));
      for (int k = 0; k < sc.k_users; ++k) {
        out.chosen.push_back(random_pattern_set(spec, rng_pat, sc.enumeration_cap));
        out.chosen_idx.push_back(pattern_set_index(spec, out.chosen.back()));
      }
      break;
    }
    case PatternSelection::optimized:
    case PatternSelection::optimized_notified:
      for (int k = 0; k < sc.k_users; ++k) {
        out.chosen.push_back(
            optimize_pattern_set(out.zf.user_g(k), spec, sc.enumeration_cap));
        out.chosen_idx.push_back(pattern_set_index(spec, out.chosen.back()));
      }
      break;
  }
  return out;
}

}  // namespace detail

/// Simulates one SNR point. Deterministic for a given scenario and seed
/// regardless of worker count: every random draw comes from a substream keyed
/// by (master_seed, stream, realization, snr), per-realization results land in
/// per-realization slots, and the reduction runs in realization order. The
/// sequential notification resolve between the two parallel phases carries the
/// receiver's set belief across frames.
inline BerRecord run_ber_point(const SimScenario& sc, double snr_db, int workers = 1) {
  sc.validate();
  const PatternSpaceSpec spec(sc.n_r, sc.n_iba);
  const Constellation constellation = Constellation::make(sc.m);
  const std::vector<double> eps = sc.eps_or_default();
  const double sigma2 = sigma_from_snr(sc.e_total, snr_db);
  const std::uint64_t snr_key = std::bit_cast<std::uint64_t>(snr_db);
  const std::size_t n_real = static_cast<std::size_t>(sc.channel_realizations);
  const bool notified = sc.policy.kind == PatternSelection::optimized_notified;

  // Phase A: channels, precoders, transmitter-side set choices.
  std::vector<detail::RealizationSetup> setup(n_real);
  parallel_for(n_real, workers, [&](std::size_t r) {
    setup[r] = detail::prepare_realization(sc, spec, r);
  });

  // Applied transmit set per (realization, user): the chosen one, or the
  // previous frame's choice under pipelined timing.
  const PatternSet set0 = pattern_set_from_index(spec, 0);
  auto applied_set = [&](std::size_t r, int k) -> const PatternSet& {
    if (sc.timing == NotificationTiming::pipelined)
      return r == 0 ? set0 : setup[r - 1].chosen[static_cast<std::size_t>(k)];
    return setup[r].chosen[static_cast<std::size_t>(k)];
  };
  auto applied_idx = [&](std::size_t r, int k) -> std::uint64_t {
    if (sc.timing == NotificationTiming::pipelined)
      return r == 0 ? 0 : setup[r - 1].chosen_idx[static_cast<std::size_t>(k)];
    return setup[r].chosen_idx[static_cast<std::size_t>(k)];
  };

  // Phase B (sequential): notification transmission and the receiver's set
  // belief. rx_idx[r][k] is what user k demodulates against during frame r.
  std::vector<std::vector<std::uint64_t>> rx_idx(
      n_real, std::vector<std::uint64_t>(static_cast<std::size_t>(sc.k_users), 0));
  std::uint64_t notification_failures = 0;
  if (notified) {
    const NotificationConfig ncfg =
        NotificationConfig::make(spec, sc.m, sc.policy.repetitions);
    std::vector<std::uint64_t> belief(static_cast<std::size_t>(sc.k_users), 0);
    const NoiseSpec noise{sigma2};
    for (std::size_t r = 0; r < n_real; ++r) {
      if (ncfg.bits_needed == 0) {
        rx_idx[r] = belief;  // single candidate set, nothing to signal
        continue;
      }
      // Energies follow the transmit sets actually applied in this frame.
      std::vector<PatternSet> tx_copy;
      tx_copy.reserve(static_cast<std::size_t>(sc.k_users));
      for (int k = 0; k < sc.k_users; ++k) tx_copy.push_back(applied_set(r, k));
      const double gamma = gamma_factor(setup[r].zf, tx_copy, eps);
      Rng rng_noise(
          derive_seed(sc.master_seed, Stream::notification_noise, r, snr_key));

      std::vector<std::vector<Eigen::VectorXcd>> blocks(
          static_cast<std::size_t>(sc.k_users));
      std::vector<double> e_k(static_cast<std::size_t>(sc.k_users), 0.0);
      for (int k = 0; k < sc.k_users; ++k) {
        e_k[static_cast<std::size_t>(k)] =
            user_energy(sc.e_total, eps[static_cast<std::size_t>(k)], gamma);
        blocks[static_cast<std::size_t>(k)] = encode_notification(
            applied_idx(r, k), ncfg, constellation, e_k[static_cast<std::size_t>(k)]);
      }
      std::vector<std::vector<Eigen::VectorXcd>> received(
          static_cast<std::size_t>(sc.k_users));
      Eigen::VectorXcd stacked(sc.k_users * sc.n_r), s, y;
      for (int t = 0; t < ncfg.block_length(); ++t) {
        for (int k = 0; k < sc.k_users; ++k)
          stacked.segment(k * sc.n_r, sc.n_r) =
              blocks[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
        transmit(setup[r].zf, stacked, s);
        propagate(setup[r].ch, s, noise, rng_noise, y);
        for (int k = 0; k < sc.k_users; ++k)
          received[static_cast<std::size_t>(k)].push_back(
              y.segment(k * sc.n_r, sc.n_r));
      }
      for (int k = 0; k < sc.k_users; ++k) {
        const NotificationDecode d =
            decode_notification(received[static_cast<std::size_t>(k)], ncfg,
                                constellation, e_k[static_cast<std::size_t>(k)]);
        if (d.valid)
          belief[static_cast<std::size_t>(k)] = d.index;
        else
          ++notification_failures;  // receiver keeps its previous set
      }
      rx_idx[r] = belief;
    }
  } else {
    for (std::size_t r = 0; r < n_real; ++r)
      for (int k = 0; k < sc.k_users; ++k)
        rx_idx[r][static_cast<std::size_t>(k)] = applied_idx(r, k);
  }

  // Phase C: data frames.
  const int bits_per_use = spec.k_ssk + sc.n_iba * constellation.bits_per_symbol();
  std::vector<detail::RealizationCounts> counts(n_real);
  parallel_for(n_real, workers, [&](std::size_t r) {
    detail::RealizationCounts& c = counts[r];
    c.user_bits.assign(static_cast<std::size_t>(sc.k_users), 0);
    c.user_errors.assign(static_cast<std::size_t>(sc.k_users), 0);

    std::vector<PatternSet> tx_sets;
    std::vector<PatternSet> rx_sets;
    tx_sets.reserve(static_cast<std::size_t>(sc.k_users));
    rx_sets.reserve(static_cast<std::size_t>(sc.k_users));
    for (int k = 0; k < sc.k_users; ++k) {
      tx_sets.push_back(applied_set(r, k));
      rx_sets.push_back(
          pattern_set_from_index(spec, rx_idx[r][static_cast<std::size_t>(k)]));
    }
    const double gamma = gamma_factor(setup[r].zf, tx_sets, eps);
    std::vector<double> e_k(static_cast<std::size_t>(sc.k_users));
    for (int k = 0; k < sc.k_users; ++k)
      e_k[static_cast<std::size_t>(k)] = std::sqrt(
          user_energy(sc.e_total, eps[static_cast<std::size_t>(k)], gamma));

    Rng rng_data(derive_seed(sc.master_seed, Stream::data_bits, r, snr_key));
    Rng rng_noise(derive_seed(sc.master_seed, Stream::noise, r, snr_key));
    const NoiseSpec noise{sigma2};

    std::vector<DetectorWorkspace> ws(static_cast<std::size_t>(sc.k_users));
    for (int k = 0; k < sc.k_users; ++k)
      ws[static_cast<std::size_t>(k)].prepare(rx_sets[static_cast<std::size_t>(k)]);

    std::vector<SpatialSymbol> tx_sym(static_cast<std::size_t>(sc.k_users));
    DetectionResult det;
    std::vector<int> bits(static_cast<std::size_t>(bits_per_use));
    Eigen::VectorXcd x_user(sc.n_r), stacked(sc.k_users * sc.n_r), s, y, y_user(sc.n_r);
    double energy_sum = 0.0;

    for (int v = 0; v < sc.vectors_per_frame; ++v) {
      for (int k = 0; k < sc.k_users; ++k) {
        const std::uint32_t block = rng_data.bit_block(bits_per_use);
        for (int b = 0; b < bits_per_use; ++b)
          bits[static_cast<std::size_t>(b)] =
              static_cast<int>((block >> (bits_per_use - 1 - b)) & 1u);
        map_bits(bits, tx_sets[static_cast<std::size_t>(k)], constellation,
                 tx_sym[static_cast<std::size_t>(k)]);
        assemble_user_vector(tx_sym[static_cast<std::size_t>(k)],
                             tx_sets[static_cast<std::size_t>(k)], constellation,
                             x_user);
        stacked.segment(k * sc.n_r, sc.n_r) =
            e_k[static_cast<std::size_t>(k)] * x_user;
      }
      transmit(setup[r].zf, stacked, s);
      energy_sum += s.squaredNorm();
      propagate(setup[r].ch, s, noise, rng_noise, y);
      for (int k = 0; k < sc.k_users; ++k) {
        y_user = y.segment(k * sc.n_r, sc.n_r);
        const double ek2 = e_k[static_cast<std::size_t>(k)] *
                           e_k[static_cast<std::size_t>(k)];
        ml_detect(y_user, ek2, rx_sets[static_cast<std::size_t>(k)], constellation,
                  ws[static_cast<std::size_t>(k)], det);
        const SpatialSymbol& tx = tx_sym[static_cast<std::size_t>(k)];
        const std::uint64_t spat = static_cast<std::uint64_t>(
            std::popcount(tx.pattern_index ^ det.pattern_index));
        std::uint64_t sym = 0;
        for (std::size_t i = 0; i < tx.symbol_labels.size(); ++i)
          sym += static_cast<std::uint64_t>(
              std::popcount(tx.symbol_labels[i] ^ det.symbol_labels[i]));
        c.spatial_errors += spat;
        c.symbol_errors += sym;
        c.errors += spat + sym;
        c.user_errors[static_cast<std::size_t>(k)] += spat + sym;
        c.user_bits[static_cast<std::size_t>(k)] +=
            static_cast<std::uint64_t>(bits_per_use);
        c.bits += static_cast<std::uint64_t>(bits_per_use);
      }
    }
    c.tx_energy_mean = energy_sum / static_cast<double>(sc.vectors_per_frame);
  });

  // Reduction in realization order; integer counts make it exact.
  BerRecord rec;
  rec.snr_db = snr_db;
  rec.per_user_ber.assign(static_cast<std::size_t>(sc.k_users), 0.0);
  rec.realization_ber.reserve(n_real);
  rec.realization_tx_energy.reserve(n_real);
  rec.notification_failures = notification_failures;
  std::vector<std::uint64_t> user_bits(static_cast<std::size_t>(sc.k_users), 0);
  std::vector<std::uint64_t> user_errors(static_cast<std::size_t>(sc.k_users), 0);
  for (std::size_t r = 0; r < n_real; ++r) {
    const detail::RealizationCounts& c = counts[r];
    rec.bits_sent += c.bits;
    rec.bit_errors += c.errors;
    rec.spatial_bit_errors += c.spatial_errors;
    rec.symbol_bit_errors += c.symbol_errors;
    rec.rejected_channels += setup[r].rejected;
    for (int k = 0; k < sc.k_users; ++k) {
      user_bits[static_cast<std::size_t>(k)] += c.user_bits[static_cast<std::size_t>(k)];
      user_errors[static_cast<std::size_t>(k)] +=
          c.user_errors[static_cast<std::size_t>(k)];
    }
    rec.realization_ber.push_back(static_cast<double>(c.errors) /
                                  static_cast<double>(c.bits));
    rec.realization_tx_energy.push_back(c.tx_energy_mean);
  }
  rec.ber = static_cast<double>(rec.bit_errors) / static_cast<double>(rec.bits_sent);
  for (int k = 0; k < sc.k_users; ++k)
    rec.per_user_ber[static_cast<std::size_t>(k)] =
        static_cast<double>(user_errors[static_cast<std::size_t>(k)]) /
        static_cast<double>(user_bits[static_cast<std::size_t>(k)]);
  if (n_real >= 2) {
    const double mean = rec.ber;
    double ss = 0.0;
    for (double b : rec.realization_ber) ss += (b - mean) * (b - mean);
    rec.ber_stderr = std::sqrt(ss / (static_cast<double>(n_real) *
                                     (static_cast<double>(n_real) - 1.0)));
  }
  return rec;
}

/// One BerRecord per grid point. Channel and pattern substreams are keyed by
/// realization only, so every SNR point (and every policy run at the same
/// seed) sees identical channels: curves are paired.
inline std::vector<BerRecord> snr_sweep(const SimScenario& sc, int workers = 1) {
  sc.validate();
  std::vector<BerRecord> out;
  out.reserve(sc.snr_grid_db.size());
  for (double snr : sc.snr_grid_db) out.push_back(run_ber_point(sc, snr, workers));
  return out;
}

/// SNR (dB) at which the curve crosses target_ber, interpolating linearly in
/// log10(BER) between the two bracketing grid points. Exact grid hits return
/// the grid SNR. Throws NumericError when no adjacent pair brackets the target.
inline double snr_at_ber(std::span<const BerRecord> records, double target_ber) {
  if (records.empty()) throw ConfigError("snr_at_ber: empty curve");
  if (!(target_ber > 0.0)) throw ConfigError("snr_at_ber: target must be positive");
  std::vector<const BerRecord*> sorted;
  sorted.reserve(records.size());
  for (const BerRecord& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const BerRecord* a, const BerRecord* b) { return a->snr_db < b->snr_db; });
  for (const BerRecord* r : sorted)
    if (r->ber == target_ber) return r->snr_db;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    const double b0 = sorted[i]->ber;
    const double b1 = sorted[i + 1]->ber;
    if (b0 <= 0.0 || b1 <= 0.0) continue;  // log interpolation needs positive BER
    const bool brackets = (b0 >= target_ber && target_ber >= b1) ||
                          (b1 >= target_ber && target_ber >= b0);
    if (!brackets) continue;
    const double l0 = std::log10(b0);
    const double l1 = std::log10(b1);
    const double lt = std::log10(target_ber);
    if (l0 == l1) return sorted[i]->snr_db;
    const double w = (l0 - lt) / (l0 - l1);
    return sorted[i]->snr_db + w * (sorted[i + 1]->snr_db - sorted[i]->snr_db);
  }
  throw NumericError("snr_at_ber: target BER " + std::to_string(target_ber) +
                     " not bracketed by the curve");
}

}  // namespace gpsm
