#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "eharq/rng.hpp"

namespace eharq {

enum class Modulation { kBpsk, kQpsk };

enum class FadingModel { kNone, kBlockAr1 };

struct ChannelConfig {
  double snr_db = 0.0;  // per-dimension Es/N0
  Modulation modulation = Modulation::kQpsk;
  FadingModel fading = FadingModel::kNone;
  double fading_rho = 0.99;  // gain correlation between consecutive transmissions
  std::uint64_t seed = 0;    // mixed into noise substreams by callers that own streams

  void validate() const {
    if (!std::isfinite(snr_db)) throw std::invalid_argument("channel: snr_db must be finite");
    if (fading == FadingModel::kBlockAr1 && (fading_rho < 0.0 || fading_rho >= 1.0))
      throw std::invalid_argument("channel: fading correlation must lie in [0, 1)");
  }
};

struct ReceivedWord {
  std::vector<double> channel_llrs;              // one per code bit, positive favors bit 1
  std::vector<std::complex<double>> tx_symbols;  // modulated word, unit gain
  std::vector<std::complex<double>> rx_symbols;
  double block_gain = 1.0;
};

// Every real dimension carries amplitude +-1 (bit 1 -> +1), so the
// demodulated LLR is 4*g*y/N0 for BPSK and Gray QPSK alike, positive exactly
// when bit 1 is the likelier hypothesis.
inline std::vector<std::complex<double>> modulate(std::span<const std::uint8_t> bits,
                                                  Modulation mod) {
  std::vector<std::complex<double>> symbols;
  if (mod == Modulation::kBpsk) {
    symbols.reserve(bits.size());
    for (auto b : bits) symbols.emplace_back(b ? 1.0 : -1.0, 0.0);
  } else {
    if (bits.size() % 2 != 0)
      throw std::invalid_argument("modulate: QPSK needs an even number of bits");
    symbols.reserve(bits.size() / 2);
    for (std::size_t i = 0; i < bits.size(); i += 2)
      symbols.emplace_back(bits[i] ? 1.0 : -1.0, bits[i + 1] ? 1.0 : -1.0);
  }
  return symbols;
}

// Complex AR(1) gain process with unit average power: h(t) = rho*h(t-1) +
// sqrt(1-rho^2)*w(t), w ~ CN(0,1). Gains are |h|, constant within a block.
class FadingProcess {
 public:
  FadingProcess(double rho, Rng rng) : rho_(rho), rng_(std::move(rng)) {
    re_ = rng_.normal() * M_SQRT1_2;
    im_ = rng_.normal() * M_SQRT1_2;
  }

  double current_gain() const { return std::sqrt(re_ * re_ + im_ * im_); }

  double next_gain() {
    const double innov = std::sqrt(1.0 - rho_ * rho_);
    re_ = rho_ * re_ + innov * rng_.normal() * M_SQRT1_2;
    im_ = rho_ * im_ + innov * rng_.normal() * M_SQRT1_2;
    return current_gain();
  }

 private:
  double rho_;
  Rng rng_;
  double re_, im_;
};

// One transmission with an explicit block gain. N0 = 10^(-snr_db/10); each
// real dimension sees noise variance N0/2.
inline ReceivedWord transmit_with_gain(std::span<const std::uint8_t> codeword,
                                       const ChannelConfig& cfg, double gain, Rng& rng) {
  cfg.validate();
  ReceivedWord out;
  out.block_gain = gain;
  out.tx_symbols = modulate(codeword, cfg.modulation);
  const double n0 = std::pow(10.0, -cfg.snr_db / 10.0);
  const double sigma = std::sqrt(n0 / 2.0);
  out.rx_symbols.reserve(out.tx_symbols.size());
  if (cfg.modulation == Modulation::kBpsk) {
    for (const auto& s : out.tx_symbols)
      out.rx_symbols.emplace_back(gain * s.real() + sigma * rng.normal(), 0.0);
  } else {
    for (const auto& s : out.tx_symbols)
      out.rx_symbols.emplace_back(gain * s.real() + sigma * rng.normal(),
                                  gain * s.imag() + sigma * rng.normal());
  }
  out.channel_llrs.reserve(codeword.size());
  const double llr_scale = 4.0 * gain / n0;
  for (const auto& y : out.rx_symbols) {
    out.channel_llrs.push_back(llr_scale * y.real());
    if (cfg.modulation == Modulation::kQpsk) out.channel_llrs.push_back(llr_scale * y.imag());
  }
  return out;
}

// Single-call form: block fading draws a stationary Rayleigh gain from the
// stream; correlated gain chains across records are the dataset generator's
// job (it owns a FadingProcess and calls transmit_with_gain).
inline ReceivedWord transmit(std::span<const std::uint8_t> codeword, const ChannelConfig& cfg,
                             Rng& rng) {
  double gain = 1.0;
  if (cfg.fading == FadingModel::kBlockAr1) {
    const double re = rng.normal() * M_SQRT1_2;
    const double im = rng.normal() * M_SQRT1_2;
    gain = std::sqrt(re * re + im * im);
  }
  return transmit_with_gain(codeword, cfg, gain, rng);
}

inline double euclidean_distance(std::span<const std::complex<double>> received,
                                 std::span<const std::complex<double>> reference) {
  if (received.size() != reference.size() || received.empty())
    throw std::invalid_argument("euclidean_distance: length mismatch or empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < received.size(); ++i) sum += std::norm(received[i] - reference[i]);
  return std::sqrt(sum);
}

}  // namespace eharq
