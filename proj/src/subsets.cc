#include "pcsi/subsets.h"

#include "pcsi/error.h"

namespace pcsi {

std::uint64_t binomial(std::uint32_t n, std::uint32_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (std::uint32_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<IndexSet> lex_subsets(std::uint32_t n, std::uint32_t k) {
  std::vector<IndexSet> out;
  if (k > n) return out;
  IndexSet cur(k);
  for (std::uint32_t i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    // Advance the rightmost element that still has room.
    int i = static_cast<int>(k) - 1;
    while (i >= 0 && cur[i] == n - k + static_cast<std::uint32_t>(i)) --i;
    if (i < 0) break;
    ++cur[i];
    for (std::uint32_t j = static_cast<std::uint32_t>(i) + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

std::uint64_t lex_rank(std::span<const std::uint32_t> subset, std::uint32_t n) {
  const auto k = static_cast<std::uint32_t>(subset.size());
  std::uint64_t rank = 0;
  std::uint32_t prev = 0;
  for (std::uint32_t i = 0; i < k; ++i) {
    PCSI_CHECK(subset[i] < n && (i == 0 || subset[i] > subset[i - 1]), ErrorCode::kBadParams,
               "subset must be sorted and within range");
    // Skip every subset whose i-th element is smaller than subset[i].
    for (std::uint32_t v = prev; v < subset[i]; ++v) rank += binomial(n - v - 1, k - i - 1);
    prev = subset[i] + 1;
  }
  return rank;
}

}  // namespace pcsi
