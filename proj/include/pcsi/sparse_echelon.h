#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "pcsi/field.h"

namespace pcsi {

struct SparseEntry {
  std::uint32_t col;
  Fe value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sorted by column, no explicit zeros.
using SparseVec = std::vector<SparseEntry>;

// Accumulates (col, value) pairs, merging duplicates and dropping zeros.
SparseVec make_sparse(std::vector<SparseEntry> entries, const PrimeField& field);

// Incrementally grown row-echelon basis of sparse vectors. Each basis row
// carries a right-hand side so the basis can also act as a linear system:
// rows are equations "functional = value" and evaluate() returns the value
// any functional in the span must take.
//
// Rows are normalized to a leading 1 and never rewritten after insertion,
// which makes truncate() an exact rollback. Not safe for concurrent use
// (a scratch accumulator is shared between calls).
class SparseEchelon {
 public:
  SparseEchelon(const PrimeField& field, std::size_t cols);

  std::size_t cols() const { return pivot_row_.size(); }
  std::size_t rank() const { return rows_.size(); }

  // Adds the equation when it is independent of the current rows; returns
  // whether the rank grew. A dependent equation whose value disagrees with
  // the system is counted in inconsistencies().
  bool insert(const SparseVec& v, Fe rhs = Fe());
  bool in_span(const SparseVec& v);
  std::optional<Fe> evaluate(const SparseVec& v);

  // Drops every row inserted after the basis had `rank` rows.
  void truncate(std::size_t rank);

  std::size_t inconsistencies() const { return inconsistencies_; }

 private:
  struct Row {
    SparseVec entries;
    Fe rhs;
  };

  // Reduces v (with right-hand side rhs) against the basis. On return
  // `residual_` holds the reduced vector (empty when v is in the span) and
  // `residual_rhs_` the reduced right-hand side.
  void reduce(const SparseVec& v, Fe rhs);

  PrimeField field_;
  std::vector<Row> rows_;
  std::vector<std::int32_t> pivot_row_;
  std::size_t inconsistencies_ = 0;

  std::vector<std::uint32_t> acc_;
  std::vector<std::uint8_t> queued_;
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> heap_;
  SparseVec residual_;
  Fe residual_rhs_;
};

}  // namespace pcsi
