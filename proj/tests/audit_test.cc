#include <gtest/gtest.h>

#include "json.hpp"
#include "oracle.h"
#include "pcsi/audit.h"
#include "pcsi/error.h"
#include "pcsi/report_json.h"

namespace {

using namespace pcsi;

std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::uint64_t ipow(std::uint64_t b, std::uint64_t e) {
  std::uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

// Valid (W, S) pairs: W outside S for Model I, inside S for Model II.
std::uint64_t pair_count(Model model, std::uint64_t k, std::uint64_t m) {
  return model == Model::kI ? choose(k, m) * (k - m) : choose(k, m) * m;
}

TEST(BetaAudit, ModelIExactlyUniform) {
  const PrimeField f(5);
  const auto rep = beta_distribution_audit(Model::kI, 3, 1, 5, default_omega(3, f));
  EXPECT_TRUE(rep.exact);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.max_tv_exact, Rational(0));
  EXPECT_EQ(rep.fingerprints.size(), pair_count(Model::kI, 3, 1));
  EXPECT_EQ(rep.count, pair_count(Model::kI, 3, 1) * ipow(4, 3));
}

TEST(BetaAudit, ModelIIExactlyUniform) {
  const PrimeField f(5);
  const auto rep = beta_distribution_audit(Model::kII, 3, 2, 5, default_omega(3, f));
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.max_tv_exact, Rational(0));
  EXPECT_EQ(rep.count, pair_count(Model::kII, 3, 2) * ipow(4, 3) * 3);
}

TEST(BetaAudit, LargerFieldAndNoSideInformation) {
  const PrimeField f7(7);
  EXPECT_TRUE(beta_distribution_audit(Model::kI, 4, 2, 7, default_omega(4, f7)).pass);
  const PrimeField f3(3);
  EXPECT_TRUE(beta_distribution_audit(Model::kI, 1, 0, 3, default_omega(1, f3)).pass);
}

TEST(BetaAudit, RefusesHugeEnumerations) {
  const PrimeField f(101);
  try {
    beta_distribution_audit(Model::kI, 6, 2, 101, default_omega(6, f));
    FAIL() << "expected TooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
}

TEST(ShapeAudit, CanonicalParams) {
  for (auto [n, fcount] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{
           {2, 3}, {2, 4}, {3, 3}, {2, 6}}) {
    const ProtocolParams p = shape_audit_params(n, fcount);
    EXPECT_EQ(p.function_count(), fcount);
    EXPECT_GE(p.super_messages(), 2u);
    EXPECT_EQ(p.model, Model::kI);
    EXPECT_EQ(p.symbols, ipow(n, fcount));
  }
  EXPECT_EQ(shape_audit_params(2, 3).messages, 3u);
  EXPECT_EQ(shape_audit_params(2, 3).side_size, 1u);
  EXPECT_EQ(shape_audit_params(2, 4).messages, 4u);
  EXPECT_EQ(shape_audit_params(2, 4).side_size, 2u);
  EXPECT_EQ(shape_audit_params(2, 2).messages, 2u);
  EXPECT_THROW(shape_audit_params(2, 1), Error);
}

TEST(ShapeAudit, PassesForThreeAndFourFunctions) {
  for (std::uint32_t fcount : {3u, 4u}) {
    const auto rep = query_shape_audit(2, fcount, 4000, 5, 0.05, 4);
    EXPECT_TRUE(rep.shapes_identical) << fcount;
    EXPECT_LT(rep.max_tv, 0.05) << fcount;
    EXPECT_TRUE(rep.pass) << fcount;
    EXPECT_FALSE(rep.fingerprints.empty());
  }
}

TEST(ShapeAudit, DetectsAnImpossibleThreshold) {
  const auto rep = query_shape_audit(2, 3, 50, 5, 0.0, 2);
  EXPECT_TRUE(rep.shapes_identical);
  EXPECT_FALSE(rep.pass);
}

TEST(ShapeAudit, RejectsSingleServer) { EXPECT_THROW(query_shape_audit(1, 3, 10, 1), Error); }

TEST(Recoverability, EnumeratesEveryInstance) {
  const auto p1 = ProtocolParams::make(Model::kI, 2, 3, 1, 5);
  EXPECT_EQ(enumerate_instances(p1).size(), pair_count(Model::kI, 3, 1) * 4);
  const auto p2 = ProtocolParams::make(Model::kII, 2, 3, 2, 5);
  EXPECT_EQ(enumerate_instances(p2).size(), pair_count(Model::kII, 3, 2) * 16);
}

TEST(Recoverability, ModelIAllRunsSucceed) {
  const auto p = ProtocolParams::make(Model::kI, 2, 3, 1, 5);
  const auto rep = exhaustive_recoverability(p, {1, 2, 3, 4, 5});
  EXPECT_EQ(rep.runs, 5u * pair_count(Model::kI, 3, 1) * 4);
  EXPECT_EQ(rep.runs, 120u);
  EXPECT_EQ(rep.failures, 0u);
  EXPECT_EQ(rep.rate_mismatches, 0u);
  EXPECT_EQ(rep.fallbacks, 0u);
  EXPECT_TRUE(rep.pass);
}

TEST(Recoverability, ModelIIAllRunsSucceed) {
  const auto p = ProtocolParams::make(Model::kII, 2, 3, 2, 5);
  const auto rep = exhaustive_recoverability(p, {7, 8});
  EXPECT_EQ(rep.runs, 2u * pair_count(Model::kII, 3, 2) * 16);
  EXPECT_EQ(rep.failures, 0u);
  EXPECT_TRUE(rep.pass);
}

TEST(Recoverability, GuardsRunBudget) {
  const auto p = ProtocolParams::make(Model::kI, 2, 3, 1, 5);
  EXPECT_THROW(exhaustive_recoverability(p, {1, 2}, 10), Error);
}

TEST(RateGrid, KnownCells) {
  const auto cells = rate_grid({ProtocolParams::make(Model::kI, 2, 4, 2, 5),
                                ProtocolParams::make(Model::kI, 3, 4, 2, 5),
                                ProtocolParams::make(Model::kII, 2, 4, 3, 5)},
                               9, 2);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0].measured, Rational(2, 3));
  EXPECT_EQ(cells[1].measured, Rational(3, 4));
  EXPECT_EQ(cells[2].measured, Rational(2, 3));
  for (const auto& c : cells) EXPECT_TRUE(c.ok());
}

TEST(RateGrid, DefaultGridMatchesClosedForm) {
  std::uint64_t want = 0;
  for (std::uint64_t n : {2, 3}) {
    for (std::uint64_t k = 1; k <= 5; ++k) {
      for (std::uint64_t m = 0; m + 1 <= k; ++m) {
        if (ipow(n, choose(k, m + 1)) <= 4096) ++want;
      }
      for (std::uint64_t m = 2; m <= k; ++m) {
        if (ipow(n, choose(k, m)) <= 4096) ++want;
      }
    }
  }
  const auto grid = default_rate_grid();
  EXPECT_EQ(grid.size(), want);
  for (const auto& p : grid) EXPECT_NO_THROW(p.validate());
  for (const auto& cell : rate_grid(grid, 1)) {
    EXPECT_TRUE(cell.ok()) << params_json(cell.params).dump() << " " << cell.error;
    // Closed form: 1 / sum_{j < r} N^-j.
    const std::int64_t r = cell.params.super_messages();
    const std::int64_t n = cell.params.servers;
    std::int64_t num = 0;
    std::int64_t den = 1;
    for (std::int64_t j = 0; j < r; ++j) den *= n;
    for (std::int64_t j = 0, pw = den; j < r; ++j, pw /= n) num += pw;
    EXPECT_EQ(cell.capacity, Rational(den, num));
  }
}

TEST(RateGrid, SmallestPrime) {
  EXPECT_EQ(smallest_prime_for(1), 3u);
  EXPECT_EQ(smallest_prime_for(3), 3u);
  EXPECT_EQ(smallest_prime_for(4), 5u);
  EXPECT_EQ(smallest_prime_for(8), 11u);
}

TEST(Reports, JsonShapes) {
  EXPECT_EQ(rational_string(Rational(2, 3)), "2/3");
  EXPECT_EQ(rational_string(Rational(1)), "1/1");
  const auto p = ProtocolParams::make(Model::kI, 2, 3, 1, 5);
  const auto rec = recoverability_json(exhaustive_recoverability(p, {1}));
  EXPECT_EQ(rec["runs"], 24);
  EXPECT_EQ(rec["pass"], true);
  const PrimeField f(5);
  const auto priv = privacy_json(beta_distribution_audit(Model::kI, 3, 1, 5, default_omega(3, f)));
  EXPECT_EQ(priv["max_tv_exact"], "0/1");
  EXPECT_EQ(priv["pass"], true);
}

}  // namespace
