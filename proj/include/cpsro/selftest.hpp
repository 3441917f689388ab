#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace cpsro {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Hook for fault-injection tests: applied to every terminal return vector
// before the zero-sum check.
using ReturnsTransform = std::function<std::array<double, 2>(std::array<double, 2>)>;

CheckResult check_zero_sum(const ReturnsTransform* corrupt = nullptr);
CheckResult check_chance_normalization();
CheckResult check_perfect_recall();
CheckResult check_gradient();
CheckResult check_matrix_nash();
CheckResult check_kuhn_best_response();
CheckResult check_maze_fixture();
CheckResult check_run_determinism();

// The fast invariant suite run by the selftest subcommand.
std::vector<CheckResult> run_selftest();

}  // namespace cpsro
