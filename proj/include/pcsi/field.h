#pragma once

// Prime-field arithmetic, polynomials and dense linear algebra over F_q.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace pcsi {

// Canonical residue in [0, q). Moduli are below 2^16 so a symbol is one
// 16-bit word on disk and on the wire.
class Fe {
 public:
  constexpr Fe() = default;
  constexpr explicit Fe(std::uint16_t value) : value_(value) {}

  constexpr std::uint16_t value() const { return value_; }
  constexpr bool is_zero() const { return value_ == 0; }

  friend constexpr auto operator<=>(Fe, Fe) = default;

 private:
  std::uint16_t value_ = 0;
};

using FeVec = std::vector<Fe>;

class PrimeField {
 public:
  static constexpr std::uint32_t kMaxModulus = 1u << 16;

  // Throws BadParams unless 3 <= q < 2^16 and q is prime.
  explicit PrimeField(std::uint32_t q);

  std::uint32_t modulus() const { return q_; }

  Fe element(std::int64_t v) const;
  FeVec elements(std::initializer_list<std::int64_t> values) const;

  Fe add(Fe a, Fe b) const {
    std::uint32_t s = std::uint32_t{a.value()} + b.value();
    return Fe(static_cast<std::uint16_t>(s >= q_ ? s - q_ : s));
  }
  Fe sub(Fe a, Fe b) const {
    return a.value() >= b.value()
               ? Fe(static_cast<std::uint16_t>(a.value() - b.value()))
               : Fe(static_cast<std::uint16_t>(q_ - (b.value() - a.value())));
  }
  Fe neg(Fe a) const { return sub(Fe(), a); }
  Fe mul(Fe a, Fe b) const {
    return Fe(static_cast<std::uint16_t>(
        (std::uint32_t{a.value()} * b.value()) % q_));
  }
  Fe pow(Fe a, std::uint64_t e) const;
  // Throws ZeroInverse for a = 0.
  Fe inv(Fe a) const;
  Fe div(Fe a, Fe b) const { return mul(a, inv(b)); }
  // +1 or -1 as a field element.
  Fe sign(int s) const { return s >= 0 ? Fe(1) : neg(Fe(1)); }

  friend bool operator==(const PrimeField&, const PrimeField&) = default;

 private:
  std::uint32_t q_;
};

bool is_prime(std::uint64_t n);

// Multiplicative inverse; ZeroInverse when x = 0.
inline Fe fq_inv(Fe x, const PrimeField& field) { return field.inv(x); }

// Coefficient i is the coefficient of x^i; never has trailing zeros, the
// zero polynomial has no coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(FeVec coeffs);

  const FeVec& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  Fe coeff(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Fe(); }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  FeVec coeffs_;
};

// Monic polynomial prod (x - root).
Polynomial poly_from_roots(std::span<const Fe> roots, const PrimeField& field);
Fe poly_eval(const Polynomial& p, Fe x, const PrimeField& field);

class MatrixFq {
 public:
  MatrixFq() = default;
  MatrixFq(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  static MatrixFq from_rows(const std::vector<FeVec>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Fe& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Fe at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<Fe> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Fe> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  MatrixFq transposed() const;
  std::vector<FeVec> to_rows() const;

  friend bool operator==(const MatrixFq&, const MatrixFq&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  FeVec data_;
};

// Reduced row echelon form; the leftmost nonzero column is always chosen as
// the next pivot. Pivot columns are appended to `pivots` when given.
MatrixFq mat_rref(MatrixFq m, const PrimeField& field,
                  std::vector<std::size_t>* pivots = nullptr);
std::size_t mat_rank(const MatrixFq& m, const PrimeField& field);

// Basis of {x : m x^T = 0}, itself in reduced row echelon form.
std::vector<FeVec> mat_nullspace(const MatrixFq& m, const PrimeField& field);

// Coefficients lambda with sum_i lambda_i rows_i = target, or nullopt when
// the target is outside the row span. Free coefficients are set to zero.
std::optional<FeVec> mat_solve_in_span(const MatrixFq& rows,
                                       std::span<const Fe> target,
                                       const PrimeField& field);

FeVec mat_vec_left(std::span<const Fe> coeffs, const MatrixFq& m,
                   const PrimeField& field);

}  // namespace pcsi
