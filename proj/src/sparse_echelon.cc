#include "pcsi/sparse_echelon.h"

#include <algorithm>

#include "pcsi/error.h"

namespace pcsi {

SparseVec make_sparse(std::vector<SparseEntry> entries, const PrimeField& field) {
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.col < b.col; });
  SparseVec out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (!out.empty() && out.back().col == e.col) {
      out.back().value = field.add(out.back().value, e.value);
    } else {
      out.push_back(e);
    }
    if (!out.empty() && out.back().value.is_zero()) out.pop_back();
  }
  return out;
}

SparseEchelon::SparseEchelon(const PrimeField& field, std::size_t cols)
    : field_(field), pivot_row_(cols, -1), acc_(cols, 0), queued_(cols, 0) {}

void SparseEchelon::reduce(const SparseVec& v, Fe rhs) {
  const std::uint32_t q = field_.modulus();
  residual_.clear();
  std::uint32_t rhs_acc = rhs.value();

  for (const auto& e : v) {
    PCSI_CHECK(e.col < cols(), ErrorCode::kDimensionMismatch, "sparse column out of range");
    acc_[e.col] = (acc_[e.col] + e.value.value()) % q;
    if (!queued_[e.col]) {
      queued_[e.col] = 1;
      heap_.push(e.col);
    }
  }

  while (!heap_.empty()) {
    std::uint32_t c = heap_.top();
    heap_.pop();
    queued_[c] = 0;
    std::uint32_t coef = acc_[c];
    if (coef == 0) continue;
    std::int32_t p = pivot_row_[c];
    if (p < 0) {
      // Leading column has no pivot: what remains is the residual.
      residual_.push_back({c, Fe(static_cast<std::uint16_t>(coef))});
      acc_[c] = 0;
      while (!heap_.empty()) {
        std::uint32_t d = heap_.top();
        heap_.pop();
        queued_[d] = 0;
        if (acc_[d] != 0) {
          residual_.push_back({d, Fe(static_cast<std::uint16_t>(acc_[d]))});
          acc_[d] = 0;
        }
      }
      break;
    }
    const Row& row = rows_[static_cast<std::size_t>(p)];
    const std::uint32_t neg = q - coef;
    for (const auto& e : row.entries) {
      acc_[e.col] = (acc_[e.col] + neg * e.value.value()) % q;
      if (!queued_[e.col] && e.col != c) {
        queued_[e.col] = 1;
        heap_.push(e.col);
      }
    }
    rhs_acc = (rhs_acc + neg * row.rhs.value()) % q;
  }
  residual_rhs_ = Fe(static_cast<std::uint16_t>(rhs_acc));
}

bool SparseEchelon::insert(const SparseVec& v, Fe rhs) {
  reduce(v, rhs);
  if (residual_.empty()) {
    if (!residual_rhs_.is_zero()) ++inconsistencies_;
    return false;
  }
  Fe scale = field_.inv(residual_.front().value);
  Row row;
  row.entries = residual_;
  for (auto& e : row.entries) e.value = field_.mul(e.value, scale);
  row.rhs = field_.mul(residual_rhs_, scale);
  pivot_row_[row.entries.front().col] = static_cast<std::int32_t>(rows_.size());
  rows_.push_back(std::move(row));
  return true;
}

bool SparseEchelon::in_span(const SparseVec& v) {
  reduce(v, Fe());
  return residual_.empty();
}

std::optional<Fe> SparseEchelon::evaluate(const SparseVec& v) {
  reduce(v, Fe());
  if (!residual_.empty()) return std::nullopt;
  // v - sum c_j row_j = 0 and the accumulated rhs is -sum c_j rhs_j.
  return field_.neg(residual_rhs_);
}

void SparseEchelon::truncate(std::size_t rank) {
  while (rows_.size() > rank) {
    pivot_row_[rows_.back().entries.front().col] = -1;
    rows_.pop_back();
  }
}

}  // namespace pcsi
