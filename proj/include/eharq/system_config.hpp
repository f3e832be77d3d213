#pragma once

#include <stdexcept>

namespace eharq {

// Finite-resource scheduled system: N_UE users with Bernoulli packet
// arrivals share n_res transmission resources per slot; packets must finish
// within t_c slots, feedback arrives t_rtt slots after a transmission.
struct SystemConfig {
  int n_ue = 20;
  double p_arrival = 0.30;
  int n_res = 10;
  int t_c = 3;
  int t_rtt = 1;
  int n_retx = 1;    // retransmission budget of the feedback chain
  double p_e = 0.0;  // block error probability per transmission
  double fnr = 0.0;  // operating point of the feedback predictor
  double fpr = 0.0;

  void validate() const {
    if (n_ue < 1 || n_res < 1 || t_c < 1 || t_rtt < 1)
      throw std::invalid_argument("system config: counts and slot spans must be positive");
    if (n_retx < 0) throw std::invalid_argument("system config: retransmission budget must be >= 0");
    const auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!ok(p_arrival) || !ok(p_e) || !ok(fnr) || !ok(fpr))
      throw std::invalid_argument("system config: probabilities must lie in [0, 1]");
  }

  // Per-served-transmission probability of triggering a retransmission:
  // a detected error or a false alarm on a success.
  double single_retransmission_prob() const { return (1.0 - fnr) * p_e + fpr * (1.0 - p_e); }
};

}  // namespace eharq
