#include "gpregime/fock_space.hpp"

#include <numeric>

#include "gpregime/error.hpp"

namespace gpregime::fock {

namespace {

// All occupations of `modes` modes with exactly `total` particles, in
// lexicographically decreasing order of the first mode.
void compositions(int modes, int total, Occupation& prefix, std::vector<Occupation>& out) {
  if (modes == 1) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int first = total; first >= 0; --first) {
    prefix.push_back(first);
    compositions(modes - 1, total - first, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

FockSpace::FockSpace(int modes, int n_cap) : modes_(modes), n_cap_(n_cap) {
  require(modes >= 1, ErrorKind::InvalidParameter, "Fock space needs at least one mode");
  require(n_cap >= 1, ErrorKind::InvalidParameter, "particle cap must be at least 1");
  require(binomial(modes + n_cap, modes) <= 20000, ErrorKind::ResourceLimit,
          "Fock space dimension exceeds 20000");
  Occupation prefix;
  for (int n = 0; n <= n_cap; ++n) {
    std::vector<Occupation> block;
    compositions(modes, n, prefix, block);
    for (auto& occ : block) {
      lookup_.emplace(occ, basis_.size());
      totals_.push_back(n);
      basis_.push_back(std::move(occ));
    }
  }
}

std::optional<std::size_t> FockSpace::index(const Occupation& occ) const {
  const auto it = lookup_.find(occ);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t FockSpace::binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

}  // namespace gpregime::fock
