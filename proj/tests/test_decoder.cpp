#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include <eharq/decoder.hpp>
#include <eharq/encoder.hpp>
#include <eharq/ldpc.hpp>
#include <eharq/rng.hpp>

#include "test_util.hpp"

using namespace eharq;

namespace {

std::vector<double> codeword_llrs(const std::vector<std::uint8_t>& word, double magnitude) {
  std::vector<double> llrs(word.size());
  for (std::size_t k = 0; k < word.size(); ++k) llrs[k] = word[k] ? magnitude : -magnitude;
  return llrs;
}

// Maximum-likelihood decision: the codeword maximizing sum of word_k * llr_k.
std::vector<std::uint8_t> ml_decode(const std::vector<std::vector<std::uint8_t>>& codebook,
                                    const std::vector<double>& llrs) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> winner;
  for (const auto& word : codebook) {
    double score = 0.0;
    for (std::size_t k = 0; k < word.size(); ++k) score += word[k] ? llrs[k] : 0.0;
    if (score > best) {
      best = score;
      winner = word;
    }
  }
  return winner;
}

}  // namespace

TEST(Decoder, NoiselessCodewordImmediate) {
  const ParityCheckMatrix h = testutil::toy_code();
  const GeneratorMapping g = GeneratorMapping::derive(h);
  const auto word = g.encode(std::vector<std::uint8_t>{1, 0, 1});
  const auto llrs = codeword_llrs(word, 50.0);
  const DecoderTrace trace = min_sum_decode(h, llrs, 50, 0);
  EXPECT_TRUE(trace.syndrome_ok);
  EXPECT_EQ(trace.iterations_used, 0);
  EXPECT_EQ(trace.hard_decision, word);
  EXPECT_EQ(trace.app_llrs.size(), 1u);
}

TEST(Decoder, NoiselessMagnitudesDoNotShrink) {
  const ParityCheckMatrix h = testutil::toy_code();
  const GeneratorMapping g = GeneratorMapping::derive(h);
  const auto word = g.encode(std::vector<std::uint8_t>{0, 1, 1});
  const auto llrs = codeword_llrs(word, 8.0);
  const DecoderTrace trace = min_sum_decode(h, llrs, 50, 5);
  ASSERT_EQ(trace.app_llrs.size(), 6u);
  for (std::size_t j = 1; j < trace.app_llrs.size(); ++j)
    for (std::size_t k = 0; k < word.size(); ++k)
      EXPECT_GE(std::fabs(trace.app_llrs[j][k]), std::fabs(trace.app_llrs[j - 1][k]) - 1e-12);
  EXPECT_EQ(trace.hard_decision, word);
}

TEST(Decoder, AllZeroLlrsAreAFixedPoint) {
  // Min-sum over zero magnitudes stays zero: every traced iteration repeats
  // the channel LLRs exactly.
  const ParityCheckMatrix h = testutil::toy_code();
  const std::vector<double> llrs(6, 0.0);
  const DecoderTrace trace = min_sum_decode(h, llrs, 10, 3);
  ASSERT_EQ(trace.app_llrs.size(), 4u);
  for (const auto& app : trace.app_llrs)
    for (double v : app) EXPECT_EQ(v, 0.0);
  // Zero LLRs decide bit 1 everywhere; all-ones fails the odd-degree checks.
  EXPECT_FALSE(trace.syndrome_ok);
}

TEST(Decoder, AllZeroLlrsSatisfyEvenDegreeChecks) {
  // On a code whose checks all have even degree the all-ones decision is a
  // codeword, so the zero fixed point terminates immediately.
  const ParityCheckMatrix h =
      ParityCheckMatrix::from_check_lists(6, {{0, 3}, {1, 4}, {2, 5}});
  const DecoderTrace trace = min_sum_decode(h, std::vector<double>(6, 0.0), 10, 0);
  EXPECT_TRUE(trace.syndrome_ok);
  EXPECT_EQ(trace.iterations_used, 0);
}

TEST(Decoder, CorrectsSingleFlippedSign) {
  const ParityCheckMatrix h = testutil::toy_code();
  const auto codebook = testutil::all_codewords(h);
  ASSERT_EQ(codebook.size(), 8u);
  const GeneratorMapping g = GeneratorMapping::derive(h);
  const auto word = g.encode(std::vector<std::uint8_t>{1, 1, 0});
  auto llrs = codeword_llrs(word, 4.0);
  llrs[0] = word[0] ? -2.0 : 2.0;  // one moderate flip
  const DecoderTrace trace = min_sum_decode(h, llrs, 50, 5);
  EXPECT_TRUE(trace.syndrome_ok);
  EXPECT_EQ(trace.hard_decision, word);
  EXPECT_EQ(trace.hard_decision, ml_decode(codebook, llrs));
}

TEST(Decoder, MatchesMlOracleOnNoisyToyBlocks) {
  const ParityCheckMatrix h = testutil::toy_code();
  const auto codebook = testutil::all_codewords(h);
  const GeneratorMapping g = GeneratorMapping::derive(h);
  Rng rng(2024);
  int decoded_errors = 0, ml_errors = 0, agree = 0, settled = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    const auto info = random_info_bits(g.n_info(), rng);
    const auto word = g.encode(info);
    std::vector<double> llrs(word.size());
    for (std::size_t k = 0; k < word.size(); ++k)
      llrs[k] = (word[k] ? 2.0 : -2.0) + 1.6 * rng.normal();
    const DecoderTrace trace = min_sum_decode(h, llrs, 50, 0);
    const auto ml = ml_decode(codebook, llrs);
    decoded_errors += trace.hard_decision != word;
    ml_errors += ml != word;
    if (trace.syndrome_ok) {
      ++settled;
      agree += trace.hard_decision == ml;
    }
  }
  // ML is optimal on average; allow 3 sigma of the per-block discrepancy.
  EXPECT_GE(decoded_errors + 3.0 * std::sqrt(static_cast<double>(decoded_errors + ml_errors)),
            static_cast<double>(ml_errors));
  EXPECT_GT(settled, trials / 2);
  // When the decoder lands on a codeword it should usually be the ML one.
  EXPECT_GT(static_cast<double>(agree) / settled, 0.9);
}

TEST(Decoder, TraceAlwaysComplete) {
  const ParityCheckMatrix h = testutil::toy_code();
  const GeneratorMapping g = GeneratorMapping::derive(h);
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto word = g.encode(random_info_bits(g.n_info(), rng));
    std::vector<double> llrs(word.size());
    for (std::size_t k = 0; k < word.size(); ++k)
      llrs[k] = (word[k] ? 1.0 : -1.0) + 2.0 * rng.normal();
    const DecoderTrace trace = min_sum_decode(h, llrs, 50, 5);
    EXPECT_EQ(trace.app_llrs.size(), 6u);
    EXPECT_EQ(trace.app_llrs[0], llrs);
    EXPECT_GE(trace.iterations_used, trace.syndrome_ok ? 0 : 50);
  }
}

TEST(Decoder, SyndromeSoundness) {
  const ParityCheckMatrix h = gallager_regular(120, 3, 6, 7);
  const MinSumDecoder decoder(h);
  Rng rng(99);
  int ok_count = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> llrs(120);
    for (auto& v : llrs) v = 3.0 * rng.normal();
    const DecoderTrace trace = decoder.decode(llrs, 30, 0);
    if (trace.syndrome_ok) {
      ++ok_count;
      EXPECT_TRUE(h.syndrome_ok(trace.hard_decision));
    }
  }
  EXPECT_GT(ok_count, 0);
}

TEST(Decoder, InputValidation) {
  const ParityCheckMatrix h = testutil::toy_code();
  EXPECT_THROW(min_sum_decode(h, std::vector<double>(5, 0.0), 10, 0), std::invalid_argument);
  EXPECT_THROW(min_sum_decode(h, std::vector<double>(6, 0.0), 2, 5), std::invalid_argument);
  std::vector<double> bad(6, 0.0);
  bad[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(min_sum_decode(h, bad, 10, 0), std::invalid_argument);
}
