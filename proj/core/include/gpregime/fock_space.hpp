#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace gpregime::fock {

using Occupation = std::vector<int>;

/// Truncated bosonic Fock space over M modes: all occupation vectors with
/// total at most N_cap, ordered by total and then lexicographically.
class FockSpace {
 public:
  FockSpace(int modes, int n_cap);

  int modes() const { return modes_; }
  int n_cap() const { return n_cap_; }
  std::size_t dim() const { return basis_.size(); }
  const Occupation& state(std::size_t i) const { return basis_.at(i); }
  int total(std::size_t i) const { return totals_.at(i); }
  std::optional<std::size_t> index(const Occupation& occ) const;

  /// C(n, k) in 64-bit arithmetic.
  static std::size_t binomial(int n, int k);

 private:
  int modes_;
  int n_cap_;
  std::vector<Occupation> basis_;
  std::vector<int> totals_;
  std::map<Occupation, std::size_t> lookup_;
};

}  // namespace gpregime::fock
