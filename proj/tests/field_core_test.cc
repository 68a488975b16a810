#include <gtest/gtest.h>

#include <random>

#include "oracle.h"
#include "pcsi/error.h"
#include "pcsi/field.h"
#include "pcsi/sparse_echelon.h"
#include "pcsi/subsets.h"

namespace {

using namespace pcsi;

oracle::Mat to_oracle(const std::vector<FeVec>& rows) {
  oracle::Mat out;
  for (const auto& r : rows) {
    oracle::Vec v;
    for (Fe x : r) v.push_back(x.value());
    out.push_back(v);
  }
  return out;
}

std::vector<FeVec> random_rows(std::size_t rows, std::size_t cols, const PrimeField& f,
                               std::mt19937_64& rng, double zero_prob = 0.0) {
  std::uniform_int_distribution<int> d(0, static_cast<int>(f.modulus()) - 1);
  std::bernoulli_distribution z(zero_prob);
  std::vector<FeVec> out(rows, FeVec(cols));
  for (auto& r : out)
    for (auto& x : r) x = z(rng) ? Fe(0) : Fe(static_cast<std::uint16_t>(d(rng)));
  return out;
}

TEST(PrimeField, AcceptsOnlyOddPrimesBelow2To16) {
  EXPECT_NO_THROW(PrimeField(3));
  EXPECT_NO_THROW(PrimeField(65521));
  for (std::uint32_t bad : {0u, 1u, 2u, 4u, 9u, 65536u, 65537u}) {
    try {
      PrimeField f(bad);
      ADD_FAILURE() << bad << " accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kBadParams) << bad;
    }
  }
}

TEST(PrimeField, ArithmeticMatchesIntegerOracle) {
  for (std::uint32_t q : {3u, 5u, 7u, 251u, 65521u}) {
    PrimeField f(q);
    std::mt19937_64 rng(q);
    std::uniform_int_distribution<std::int64_t> d(0, q - 1);
    for (int i = 0; i < 2000; ++i) {
      const std::int64_t a = d(rng);
      const std::int64_t b = d(rng);
      const Fe fa = f.element(a);
      const Fe fb = f.element(b);
      EXPECT_EQ(f.add(fa, fb).value(), oracle::mod(a + b, q));
      EXPECT_EQ(f.sub(fa, fb).value(), oracle::mod(a - b, q));
      EXPECT_EQ(f.mul(fa, fb).value(), oracle::mod(a * b, q));
      EXPECT_EQ(f.neg(fa).value(), oracle::mod(-a, q));
      EXPECT_EQ(f.pow(fa, static_cast<std::uint64_t>(b)).value(), oracle::pow_mod(a, b, q));
      if (a != 0) {
        EXPECT_EQ(f.inv(fa).value(), oracle::inv(a, q));
      }
    }
  }
}

TEST(PrimeField, InverseExamples) {
  PrimeField f5(5);
  EXPECT_EQ(f5.inv(Fe(2)), Fe(3));
  EXPECT_EQ(f5.inv(Fe(4)), Fe(4));
  EXPECT_EQ(fq_inv(Fe(3), f5), Fe(2));
  EXPECT_EQ(f5.element(-1), Fe(4));
  EXPECT_EQ(f5.sign(-1), Fe(4));
  EXPECT_EQ(f5.sign(1), Fe(1));
  try {
    f5.inv(Fe(0));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroInverse);
  }
}

TEST(Polynomial, FromRootsMatchesNaiveExpansion) {
  PrimeField f(7);
  const FeVec roots = f.elements({1, 3, 6});
  const Polynomial p = poly_from_roots(roots, f);
  // (x-1)(x-3)(x-6) = x^3 - 10x^2 + 27x - 18 over F_7.
  EXPECT_EQ(p.coeffs(), f.elements({-18, 27, -10, 1}));
  EXPECT_EQ(p.degree(), 3);
  for (std::int64_t x = 0; x < 7; ++x) {
    const std::int64_t want = oracle::mod((x - 1) * (x - 3) * (x - 6), 7);
    EXPECT_EQ(poly_eval(p, f.element(x), f).value(), want);
  }
  EXPECT_EQ(poly_from_roots({}, f).coeffs(), f.elements({1}));
  EXPECT_EQ(Polynomial(f.elements({0, 0})).degree(), -1);
}

TEST(Matrix, RankAndNullspaceAgreeWithOracle) {
  std::mt19937_64 rng(11);
  for (std::uint32_t q : {5u, 13u}) {
    PrimeField f(q);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t rows = 1 + rng() % 6;
      const std::size_t cols = 1 + rng() % 7;
      const auto m = random_rows(rows, cols, f, rng, 0.4);
      const auto mat = MatrixFq::from_rows(m);
      const std::size_t r = mat_rank(mat, f);
      EXPECT_EQ(r, oracle::rank(to_oracle(m), q));
      const auto ns = mat_nullspace(mat, f);
      EXPECT_EQ(ns.size(), cols - r);
      for (const auto& v : ns) {
        for (const auto& row : m) {
          std::int64_t dot = 0;
          for (std::size_t j = 0; j < cols; ++j) dot += std::int64_t{row[j].value()} * v[j].value();
          EXPECT_EQ(oracle::mod(dot, q), 0);
        }
      }
      if (!ns.empty()) {
        EXPECT_EQ(oracle::rank(to_oracle(ns), q), ns.size());
      }
    }
  }
}

TEST(Matrix, RrefPicksLeftmostPivots) {
  PrimeField f(5);
  const auto m = MatrixFq::from_rows({f.elements({0, 2, 4}), f.elements({0, 1, 3})});
  std::vector<std::size_t> pivots;
  const auto r = mat_rref(m, f, &pivots);
  EXPECT_EQ(pivots, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(r.to_rows()[0], f.elements({0, 1, 0}));
  EXPECT_EQ(r.to_rows()[1], f.elements({0, 0, 1}));
}

TEST(Matrix, SolveInSpanReconstructsCombinations) {
  std::mt19937_64 rng(5);
  PrimeField f(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rows = random_rows(1 + rng() % 4, 5, f, rng);
    const auto mat = MatrixFq::from_rows(rows);
    const auto coeffs = random_rows(1, rows.size(), f, rng)[0];
    const FeVec target = mat_vec_left(coeffs, mat, f);
    const auto sol = mat_solve_in_span(mat, target, f);
    ASSERT_TRUE(sol.has_value());
    EXPECT_EQ(mat_vec_left(*sol, mat, f), target);
  }
  const auto e1 = MatrixFq::from_rows({f.elements({1, 0})});
  EXPECT_FALSE(mat_solve_in_span(e1, f.elements({0, 1}), f).has_value());
}

TEST(Matrix, TransposeRoundTrip) {
  PrimeField f(5);
  const auto m = MatrixFq::from_rows({f.elements({1, 2, 3}), f.elements({4, 0, 1})});
  const auto t = m.transposed();
  EXPECT_EQ(t.rows(), 3u);
  EXPECT_EQ(t.at(2, 1), Fe(1));
  EXPECT_EQ(t.transposed().to_rows(), m.to_rows());
}

TEST(SparseEchelon, MakeSparseMergesAndDropsZeros) {
  PrimeField f(5);
  const auto v = make_sparse({{3, Fe(2)}, {1, Fe(4)}, {3, Fe(3)}, {1, Fe(2)}, {0, Fe(0)}}, f);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].col, 1u);
  EXPECT_EQ(v[0].value, Fe(1));
}

TEST(SparseEchelon, RankSpanAndEvaluationMatchDenseOracle) {
  std::mt19937_64 rng(42);
  for (std::uint32_t q : {3u, 5u, 31u}) {
    PrimeField f(q);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t cols = 3 + rng() % 10;
      const std::size_t n = 1 + rng() % 12;
      const auto rows = random_rows(n, cols, f, rng, 0.6);
      const auto x = random_rows(1, cols, f, rng)[0];  // hidden solution
      SparseEchelon ech(f, cols);
      oracle::Mat kept;
      oracle::Vec rhs;
      for (const auto& r : rows) {
        std::vector<SparseEntry> e;
        std::int64_t val = 0;
        for (std::uint32_t c = 0; c < cols; ++c) {
          e.push_back({c, r[c]});
          val += std::int64_t{r[c].value()} * x[c].value();
        }
        const bool indep = ech.insert(make_sparse(e, f), f.element(val));
        oracle::Mat with = kept;
        with.push_back(to_oracle({r})[0]);
        EXPECT_EQ(indep, oracle::rank(with, q) > oracle::rank(kept, q));
        kept = with;
        rhs.push_back(oracle::mod(val, q));
      }
      EXPECT_EQ(ech.rank(), oracle::rank(kept, q));
      EXPECT_EQ(ech.inconsistencies(), 0u);
      for (int probe = 0; probe < 10; ++probe) {
        const auto t = random_rows(1, cols, f, rng, 0.5)[0];
        std::vector<SparseEntry> e;
        for (std::uint32_t c = 0; c < cols; ++c) e.push_back({c, t[c]});
        const auto got = ech.evaluate(make_sparse(e, f));
        const auto want = oracle::determined_value(kept, rhs, to_oracle({t})[0], q);
        ASSERT_EQ(got.has_value(), want.has_value());
        if (got) {
          EXPECT_EQ(got->value(), *want);
        }
      }
    }
  }
}

TEST(SparseEchelon, CountsInconsistentEquationsAndTruncates) {
  PrimeField f(5);
  SparseEchelon ech(f, 3);
  EXPECT_TRUE(ech.insert({{0, Fe(1)}, {1, Fe(1)}}, Fe(2)));
  EXPECT_FALSE(ech.insert({{0, Fe(2)}, {1, Fe(2)}}, Fe(4)));
  EXPECT_EQ(ech.inconsistencies(), 0u);
  EXPECT_FALSE(ech.insert({{0, Fe(1)}, {1, Fe(1)}}, Fe(3)));
  EXPECT_EQ(ech.inconsistencies(), 1u);
  EXPECT_TRUE(ech.insert({{2, Fe(1)}}, Fe(1)));
  EXPECT_TRUE(ech.in_span({{2, Fe(3)}}));
  ech.truncate(1);
  EXPECT_EQ(ech.rank(), 1u);
  EXPECT_FALSE(ech.in_span({{2, Fe(3)}}));
}

TEST(Subsets, LexOrderAndRank) {
  const auto s = lex_subsets(4, 2);
  const std::vector<IndexSet> want = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(s, want);
  for (std::uint32_t n = 0; n <= 7; ++n) {
    for (std::uint32_t k = 0; k <= n; ++k) {
      const auto all = lex_subsets(n, k);
      // Pascal recurrence as the oracle for the count.
      std::vector<std::vector<std::uint64_t>> c(n + 1, std::vector<std::uint64_t>(n + 1, 0));
      for (std::uint32_t i = 0; i <= n; ++i) {
        c[i][0] = 1;
        for (std::uint32_t j = 1; j <= i; ++j) c[i][j] = c[i - 1][j - 1] + (j < i ? c[i - 1][j] : 0);
      }
      EXPECT_EQ(all.size(), c[n][k]);
      EXPECT_EQ(binomial(n, k), c[n][k]);
      for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(lex_rank(all[i], n), i);
    }
  }
  EXPECT_EQ(binomial(3, 5), 0u);
}

}  // namespace
