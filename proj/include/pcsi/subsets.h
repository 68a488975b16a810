#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pcsi {

using IndexSet = std::vector<std::uint32_t>;

std::uint64_t binomial(std::uint32_t n, std::uint32_t k);

// All k-subsets of {0, ..., n-1}, each sorted, in lexicographic order.
std::vector<IndexSet> lex_subsets(std::uint32_t n, std::uint32_t k);

// Position of a sorted k-subset of {0, ..., n-1} in lex_subsets(n, k).
std::uint64_t lex_rank(std::span<const std::uint32_t> subset, std::uint32_t n);

}  // namespace pcsi
