#include "pcsi/field.h"

#include <string>
#include <utility>

#include "pcsi/error.h"

namespace pcsi {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

PrimeField::PrimeField(std::uint32_t q) : q_(q) {
  PCSI_CHECK(q >= 3 && q < kMaxModulus && is_prime(q), ErrorCode::kBadParams,
             "field modulus must be a prime in [3, 65536), got " + std::to_string(q));
}

Fe PrimeField::element(std::int64_t v) const {
  std::int64_t r = v % static_cast<std::int64_t>(q_);
  if (r < 0) r += q_;
  return Fe(static_cast<std::uint16_t>(r));
}

FeVec PrimeField::elements(std::initializer_list<std::int64_t> values) const {
  FeVec out;
  out.reserve(values.size());
  for (auto v : values) out.push_back(element(v));
  return out;
}

Fe PrimeField::pow(Fe a, std::uint64_t e) const {
  Fe result(1);
  while (e > 0) {
    if (e & 1) result = mul(result, a);
    a = mul(a, a);
    e >>= 1;
  }
  return result;
}

Fe PrimeField::inv(Fe a) const {
  PCSI_CHECK(!a.is_zero(), ErrorCode::kZeroInverse, "inverse of zero");
  // Extended Euclid on small integers.
  std::int64_t t = 0, new_t = 1;
  std::int64_t r = q_, new_r = a.value();
  while (new_r != 0) {
    std::int64_t quot = r / new_r;
    t = std::exchange(new_t, t - quot * new_t);
    r = std::exchange(new_r, r - quot * new_r);
  }
  return element(t);
}

Polynomial::Polynomial(FeVec coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
}

Polynomial poly_from_roots(std::span<const Fe> roots, const PrimeField& field) {
  FeVec c{Fe(1)};
  for (Fe root : roots) {
    // c(x) * (x - root)
    FeVec next(c.size() + 1);
    Fe minus_root = field.neg(root);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] = field.add(next[i + 1], c[i]);
      next[i] = field.add(next[i], field.mul(c[i], minus_root));
    }
    c = std::move(next);
  }
  return Polynomial(std::move(c));
}

Fe poly_eval(const Polynomial& p, Fe x, const PrimeField& field) {
  Fe acc;
  const auto& c = p.coeffs();
  for (auto it = c.rbegin(); it != c.rend(); ++it) {
    acc = field.add(field.mul(acc, x), *it);
  }
  return acc;
}

MatrixFq MatrixFq::from_rows(const std::vector<FeVec>& rows) {
  if (rows.empty()) return {};
  MatrixFq m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    PCSI_CHECK(rows[r].size() == m.cols(), ErrorCode::kDimensionMismatch,
               "ragged matrix rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m.at(r, c) = rows[r][c];
  }
  return m;
}

MatrixFq MatrixFq::transposed() const {
  MatrixFq t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
  return t;
}

std::vector<FeVec> MatrixFq::to_rows() const {
  std::vector<FeVec> out;
  out.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto s = row(r);
    out.emplace_back(s.begin(), s.end());
  }
  return out;
}

MatrixFq mat_rref(MatrixFq m, const PrimeField& field, std::vector<std::size_t>* pivots) {
  std::size_t lead_row = 0;
  for (std::size_t col = 0; col < m.cols() && lead_row < m.rows(); ++col) {
    std::size_t pick = lead_row;
    while (pick < m.rows() && m.at(pick, col).is_zero()) ++pick;
    if (pick == m.rows()) continue;
    if (pick != lead_row) {
      for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m.at(pick, c), m.at(lead_row, c));
    }
    Fe scale = field.inv(m.at(lead_row, col));
    for (std::size_t c = 0; c < m.cols(); ++c) m.at(lead_row, c) = field.mul(m.at(lead_row, c), scale);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == lead_row || m.at(r, col).is_zero()) continue;
      Fe factor = m.at(r, col);
      for (std::size_t c = col; c < m.cols(); ++c) {
        m.at(r, c) = field.sub(m.at(r, c), field.mul(factor, m.at(lead_row, c)));
      }
    }
    if (pivots) pivots->push_back(col);
    ++lead_row;
  }
  return m;
}

std::size_t mat_rank(const MatrixFq& m, const PrimeField& field) {
  std::vector<std::size_t> pivots;
  mat_rref(m, field, &pivots);
  return pivots.size();
}

std::vector<FeVec> mat_nullspace(const MatrixFq& m, const PrimeField& field) {
  std::vector<std::size_t> pivots;
  MatrixFq r = mat_rref(m, field, &pivots);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : pivots) is_pivot[p] = true;

  std::vector<FeVec> basis;
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    FeVec x(m.cols());
    x[free] = Fe(1);
    for (std::size_t i = 0; i < pivots.size(); ++i) {
      x[pivots[i]] = field.neg(r.at(i, free));
    }
    basis.push_back(std::move(x));
  }
  if (basis.empty()) return basis;
  return mat_rref(MatrixFq::from_rows(basis), field).to_rows();
}

std::optional<FeVec> mat_solve_in_span(const MatrixFq& rows, std::span<const Fe> target,
                                       const PrimeField& field) {
  PCSI_CHECK(target.size() == rows.cols() || rows.rows() == 0, ErrorCode::kDimensionMismatch,
             "target length does not match row length");
  const std::size_t n = rows.rows();
  if (n == 0) {
    for (Fe t : target)
      if (!t.is_zero()) return std::nullopt;
    return FeVec{};
  }
  // Columns of the augmented system are the candidate rows, last column is the target.
  MatrixFq aug(rows.cols(), n + 1);
  for (std::size_t c = 0; c < rows.cols(); ++c) {
    for (std::size_t r = 0; r < n; ++r) aug.at(c, r) = rows.at(r, c);
    aug.at(c, n) = target[c];
  }
  std::vector<std::size_t> pivots;
  MatrixFq red = mat_rref(std::move(aug), field, &pivots);
  if (!pivots.empty() && pivots.back() == n) return std::nullopt;
  FeVec lambda(n);
  for (std::size_t i = 0; i < pivots.size(); ++i) lambda[pivots[i]] = red.at(i, n);
  return lambda;
}

FeVec mat_vec_left(std::span<const Fe> coeffs, const MatrixFq& m, const PrimeField& field) {
  PCSI_CHECK(coeffs.size() == m.rows(), ErrorCode::kDimensionMismatch,
             "coefficient count does not match row count");
  FeVec out(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (coeffs[r].is_zero()) continue;
    for (std::size_t c = 0; c < m.cols(); ++c)
      out[c] = field.add(out[c], field.mul(coeffs[r], m.at(r, c)));
  }
  return out;
}

}  // namespace pcsi
