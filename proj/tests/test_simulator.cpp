#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include <eharq/simulator.hpp>
#include <eharq/stats.hpp>
#include <eharq/system_config.hpp>

using namespace eharq;

TEST(Simulator, AbundantResourcesRecoverChainFloor) {
  SystemConfig cfg;
  cfg.n_ue = 3;
  cfg.p_arrival = 0.3;
  cfg.n_res = 12;  // >= n_ue * (t_c + 1): nothing ever waits
  cfg.t_c = 3;
  cfg.t_rtt = 1;
  cfg.n_retx = 2;
  cfg.p_e = 0.05;
  const SimulationResult result = simulate_system(cfg, 100000, 21, 3.0);
  ASSERT_GT(result.packets, 0);
  EXPECT_TRUE(result.ci.contains(std::pow(cfg.p_e, 3)))
      << "p_pf " << result.p_pf << " ci [" << result.ci.lo << ", " << result.ci.hi << "]";
}

TEST(Simulator, ErrorFreeChannelNeverFails) {
  SystemConfig cfg;
  cfg.n_ue = 5;
  cfg.p_arrival = 0.4;
  cfg.n_res = 5;
  cfg.t_c = 2;
  cfg.p_e = 0.0;
  const SimulationResult result = simulate_system(cfg, 20000, 4);
  EXPECT_GT(result.packets, 0);
  EXPECT_EQ(result.failures, 0);
  EXPECT_EQ(result.p_pf, 0.0);
}

TEST(Simulator, CertainErrorAlwaysFails) {
  SystemConfig cfg;
  cfg.n_ue = 4;
  cfg.p_arrival = 0.3;
  cfg.n_res = 6;
  cfg.t_c = 4;
  cfg.n_retx = 2;
  cfg.p_e = 1.0;
  cfg.fnr = 0.0;  // every error flagged: packets retransmit until they expire
  const SimulationResult flagged = simulate_system(cfg, 5000, 9);
  EXPECT_GT(flagged.packets, 0);
  EXPECT_EQ(flagged.failures, flagged.packets);

  cfg.fnr = 1.0;  // every error slips through on first service
  const SimulationResult unflagged = simulate_system(cfg, 5000, 9);
  EXPECT_EQ(unflagged.failures, unflagged.packets);
}

TEST(Simulator, DeterministicPerSeed) {
  SystemConfig cfg;
  cfg.n_ue = 10;
  cfg.p_arrival = 0.3;
  cfg.n_res = 5;
  cfg.t_c = 3;
  cfg.p_e = 0.1;
  cfg.fnr = 0.01;
  cfg.fpr = 0.02;
  const SimulationResult a = simulate_system(cfg, 30000, 11);
  const SimulationResult b = simulate_system(cfg, 30000, 11);
  EXPECT_EQ(a.packets, b.packets);
  EXPECT_EQ(a.failures, b.failures);
  const SimulationResult c = simulate_system(cfg, 30000, 12);
  EXPECT_NE(a.packets, c.packets);
}

TEST(Simulator, ReportsCoherentInterval) {
  SystemConfig cfg;
  cfg.n_ue = 10;
  cfg.p_arrival = 0.3;
  cfg.n_res = 4;
  cfg.t_c = 3;
  cfg.p_e = 0.1;
  const SimulationResult result = simulate_system(cfg, 20000, 5);
  EXPECT_LE(result.ci.lo, result.p_pf);
  EXPECT_GE(result.ci.hi, result.p_pf);
  EXPECT_EQ(result.slots_measured, 20000);
  EXPECT_THROW(simulate_system(cfg, 0, 1), std::invalid_argument);
}
