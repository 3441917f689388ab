#pragma once

// Test-only exact zero-sum matrix solver by support enumeration over square
// supports (Shapley-Snow kernels), solved with Gaussian elimination. Kept
// independent of the production regret-matching solver on purpose: it is the
// oracle that checks it.

#include "cpsro/meta.hpp"

namespace cpsro::oracles {

struct SupportEnumResult {
  bool found = false;
  double value = 0.0;
  std::vector<double> row, col;
};

SupportEnumResult support_enumeration_zero_sum(const Matrix& payoff);

}  // namespace cpsro::oracles
