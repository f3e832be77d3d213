// Sweeps a synthetic detector curve through the finite-resource system model
// and prints the packet failure probability along the false-negative axis.
// Under high load the optimum sits in the interior -- false alarms burn
// resources other users need -- while under lighter load the best move is to
// retransmit on the faintest suspicion.

#include <cstdio>

#include "eharq/metrics.hpp"
#include "eharq/stats.hpp"
#include "eharq/system.hpp"

using namespace eharq;

namespace {

// Inverse of the Gaussian tail by bisection (q_function is monotone).
double q_inverse(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (q_function(mid) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Binormal detector: at separation d_prime, a false-negative budget buys
// fpr = Q(d_prime - Q^{-1}(fnr)).
CurveSet binormal_curve(double d_prime, int n_points) {
  CurveSet curve;
  for (int i = 0; i < n_points; ++i) {
    OperatingPoint pt;
    pt.fnr = 1e-4 * std::pow(10.0, 3.0 * i / (n_points - 1));
    pt.fpr = q_function(d_prime - q_inverse(pt.fnr));
    curve.points.push_back(pt);
  }
  return curve;
}

}  // namespace

int main() {
  SystemConfig base;
  base.n_ue = 20;
  base.n_res = 10;
  base.t_c = 3;
  base.t_rtt = 1;
  base.n_retx = 2;
  base.p_e = 0.004742;

  const CurveSet curve = binormal_curve(6.0, 13);
  for (const double load : {0.30, 0.36}) {
    base.p_arrival = load;
    const SystemSweepResult sweep = fnr_sweep_system(base, curve);
    std::printf("arrival probability %.2f per user (%d users, %d resources)\n",
                load, base.n_ue, base.n_res);
    std::printf("  %10s  %10s  %12s\n", "fnr", "fpr", "packet fail");
    for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
      const auto& row = sweep.rows[i];
      std::printf("  %10.2e  %10.2e  %12.4e%s\n", row.fnr, row.fpr, row.p_pf_analytic,
                  sweep.argmin && *sweep.argmin == i ? "  <- best" : "");
    }
    std::printf("\n");
  }
  return 0;
}
