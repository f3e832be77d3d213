#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eharq/channel.hpp"
#include "eharq/csv.hpp"
#include "eharq/decoder.hpp"
#include "eharq/encoder.hpp"
#include "eharq/features.hpp"
#include "eharq/ldpc.hpp"
#include "eharq/stats.hpp"

namespace eharq {

struct GenerationConfig {
  ChannelConfig channel;
  double subcode_fraction = 5.0 / 6.0;
  int vnr_iters = 5;
  int full_decode_iters = 50;
  std::int64_t n_records = 0;
  std::uint64_t seed = 0;

  void validate() const {
    channel.validate();
    if (vnr_iters < 0 || full_decode_iters < vnr_iters)
      throw std::invalid_argument("generation: need 0 <= vnr_iters <= full_decode_iters");
    if (n_records <= 0) throw std::invalid_argument("generation: n_records must be positive");
  }
};

struct GenerationSummary {
  std::int64_t n_records = 0;
  std::int64_t n_errors = 0;
  double bler = 0.0;
  Interval bler_ci;
  double snr_db = 0.0;
};

namespace detail {

// Noise and payload streams are derived per record index, so records are
// independent of generation order; the fading chain is inherently sequential
// and lives on its own stream.
inline std::uint64_t noise_master(const GenerationConfig& cfg) {
  return cfg.seed ^ cfg.channel.seed;
}

}  // namespace detail

// Runs the full per-record pipeline and streams CSV rows in index order:
// random info word -> encode -> channel -> subcode decode (feature trace) ->
// full decode (label). Label 1 means block error: decoded bits differ from
// the transmitted codeword.
inline GenerationSummary generate_dataset(const GenerationConfig& cfg, const ParityCheckMatrix& h,
                                          std::ostream& out) {
  cfg.validate();
  const GeneratorMapping gen = derive_generator(h);
  const SubcodeView view = extract_subcode(h, cfg.subcode_fraction);
  const MinSumDecoder sub_decoder(h, view);
  const MinSumDecoder full_decoder(h);
  const std::uint64_t master = detail::noise_master(cfg);

  std::vector<double> gains;
  if (cfg.channel.fading == FadingModel::kBlockAr1) {
    gains.resize(static_cast<std::size_t>(cfg.n_records));
    FadingProcess fading(cfg.channel.fading_rho, substream(master, stream_tag::kFading, 0));
    for (auto& g : gains) {
      g = fading.current_gain();
      fading.next_gain();
    }
  }

  out << "idx,label";
  for (int j = 0; j <= cfg.vnr_iters; ++j) out << ",vnr_" << j;
  out << ",eucd,gain\n";

  GenerationSummary summary;
  summary.n_records = cfg.n_records;
  summary.snr_db = cfg.channel.snr_db;
  std::vector<std::complex<double>> reference;
  for (std::int64_t i = 0; i < cfg.n_records; ++i) {
    Rng rng = substream(master, stream_tag::kRecord, static_cast<std::uint64_t>(i));
    const auto info = random_info_bits(gen.n_info(), rng);
    const auto codeword = gen.encode(info);
    const double gain = gains.empty() ? 1.0 : gains[static_cast<std::size_t>(i)];
    const ReceivedWord rx = transmit_with_gain(codeword, cfg.channel, gain, rng);

    const auto sub_llrs = gather_subcode<double>(view, rx.channel_llrs);
    const DecoderTrace sub_trace = sub_decoder.decode(sub_llrs, cfg.vnr_iters, cfg.vnr_iters);
    const std::vector<double> vnr = vnr_sequence(sub_trace);

    const DecoderTrace full_trace = full_decoder.decode(rx.channel_llrs, cfg.full_decode_iters, 0);
    const bool error = full_trace.hard_decision != codeword;
    if (error) ++summary.n_errors;

    // Distance to the noiseless received signal (the faded correct codeword).
    reference.assign(rx.tx_symbols.begin(), rx.tx_symbols.end());
    for (auto& s : reference) s *= gain;
    const double eucd = euclidean_distance(rx.rx_symbols, reference);

    out << i << ',' << (error ? 1 : 0);
    for (double v : vnr) out << ',' << format_g17(v);
    out << ',' << format_g17(eucd) << ',' << format_g17(gain) << '\n';
  }
  if (!out) throw std::runtime_error("generate_dataset: write failure");
  summary.bler =
      static_cast<double>(summary.n_errors) / static_cast<double>(summary.n_records);
  summary.bler_ci = wilson_interval(summary.n_errors, summary.n_records);
  return summary;
}

struct CalibrationConfig {
  Modulation modulation = Modulation::kQpsk;
  double snr_lo_db = -6.0;
  double snr_hi_db = 12.0;
  std::int64_t trials_per_point = 20000;
  int max_bisections = 40;
  int full_decode_iters = 50;
  std::uint64_t seed = 1;
};

namespace detail {

inline double bler_at_snr(const GeneratorMapping& gen, const MinSumDecoder& decoder,
                          const CalibrationConfig& cfg, double snr_db,
                          std::int64_t& errors_out) {
  ChannelConfig channel;
  channel.snr_db = snr_db;
  channel.modulation = cfg.modulation;
  std::int64_t errors = 0;
  for (std::int64_t t = 0; t < cfg.trials_per_point; ++t) {
    // Common random numbers across SNR points keep the estimate monotone.
    Rng rng = substream(cfg.seed, stream_tag::kCalibration, static_cast<std::uint64_t>(t));
    const auto info = random_info_bits(gen.n_info(), rng);
    const auto codeword = gen.encode(info);
    const ReceivedWord rx = transmit_with_gain(codeword, channel, 1.0, rng);
    const DecoderTrace trace = decoder.decode(rx.channel_llrs, cfg.full_decode_iters, 0);
    if (trace.hard_decision != codeword) ++errors;
  }
  errors_out = errors;
  return static_cast<double>(errors) / static_cast<double>(cfg.trials_per_point);
}

}  // namespace detail

// Bisects the SNR until the Monte Carlo BLER confidence interval contains the
// target (or the estimate lands within the relative tolerance).
inline double calibrate_snr(const ParityCheckMatrix& h, double target_bler, double rel_tol,
                            const CalibrationConfig& cfg = {}) {
  if (!(target_bler > 0.0) || target_bler > 0.5)
    throw std::invalid_argument("calibrate_snr: target must lie in (0, 0.5]");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("calibrate_snr: tolerance must be positive");
  if (static_cast<double>(cfg.trials_per_point) * target_bler < 10.0)
    throw std::invalid_argument(
        "calibrate_snr: insufficient trials to resolve target " + format_g17(target_bler) +
        " (need at least " + std::to_string(static_cast<long long>(10.0 / target_bler)) +
        " per point)");

  const GeneratorMapping gen = derive_generator(h);
  const MinSumDecoder decoder(h);
  std::int64_t errors = 0;
  double lo = cfg.snr_lo_db, hi = cfg.snr_hi_db;
  const double bler_lo = detail::bler_at_snr(gen, decoder, cfg, lo, errors);
  const double bler_hi = detail::bler_at_snr(gen, decoder, cfg, hi, errors);
  if (bler_lo < target_bler || bler_hi > target_bler)
    throw std::runtime_error("calibrate_snr: search range [" + format_g17(lo) + ", " +
                             format_g17(hi) + "] dB does not bracket the target");

  double mid = 0.5 * (lo + hi);
  for (int step = 0; step < cfg.max_bisections; ++step) {
    mid = 0.5 * (lo + hi);
    const double bler = detail::bler_at_snr(gen, decoder, cfg, mid, errors);
    const Interval ci = wilson_interval(errors, cfg.trials_per_point);
    if (ci.contains(target_bler) || std::fabs(bler - target_bler) <= rel_tol * target_bler)
      return mid;
    if (bler > target_bler)
      lo = mid;
    else
      hi = mid;
  }
  throw std::runtime_error("calibrate_snr: did not settle within the bisection budget");
}

}  // namespace eharq
