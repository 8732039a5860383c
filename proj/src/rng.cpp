#include "longrecipe/rng.hpp"

#include "longrecipe/error.hpp"

namespace longrecipe {

std::vector<std::uint64_t> sample_sorted_subset(std::uint64_t n, std::uint64_t k, Rng& rng) {
  require_input(k <= n, "sample_sorted_subset: k exceeds population");
  std::vector<std::uint64_t> out;
  out.reserve(k);
  std::uint64_t needed = k;
  for (std::uint64_t i = 0; i < n && needed > 0; ++i) {
    const std::uint64_t remaining = n - i;
    // select i with probability needed / remaining
    if (rng.uniform(0, remaining - 1) < needed) {
      out.push_back(i);
      --needed;
    }
  }
  return out;
}

}  // namespace longrecipe
