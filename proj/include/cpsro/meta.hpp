#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cpsro/game.hpp"
#include "cpsro/learning.hpp"

namespace cpsro {

struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> values;  // row-major

  static Matrix zeros(int r, int c) { return {r, c, std::vector<double>(static_cast<size_t>(r) * c, 0.0)}; }
  double& at(int r, int c) { return values[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
};

using MetaStrategy = std::vector<double>;

// Empirical restricted-game payoffs: player-0 expected utility per policy
// pair, plus the episode count behind each estimate (0 = missing).
struct PayoffMatrix {
  Matrix means;
  std::vector<int64_t> counts;

  static PayoffMatrix empty(int rows, int cols);
  int64_t& count(int r, int c) { return counts[static_cast<size_t>(r) * means.cols + c]; }
  int64_t count(int r, int c) const { return counts[static_cast<size_t>(r) * means.cols + c]; }
  bool complete() const;
  // Extends to (rows, cols), keeping existing entries and flagging new ones
  // missing.
  void grow(int rows, int cols);
};

struct NashResult {
  MetaStrategy row, col;
  double exploitability = 0.0;
  bool converged = false;
  int64_t iterations = 0;
};

// Zero-sum matrix equilibrium by regret-matching(+) self-play with linearly
// weighted strategy averaging; stops once the averaged profile's matrix
// exploitability reaches tol, else returns the best iterate found with
// converged = false.
NashResult solve_meta_nash(const Matrix& payoff, double tol = 1e-6, int64_t max_iters = 1000000);

// max_i (M sigma_col)_i - min_j (sigma_row^T M)_j; zero exactly at equilibrium.
double matrix_exploitability(const Matrix& payoff, const MetaStrategy& row,
                             const MetaStrategy& col);

// Monte-Carlo estimates for entries with no episodes yet: both policies play
// their deployment actions. Entry (r, c) draws its rng stream from
// (seed, r, c), so the fill order (or a parallel fill) cannot change results.
void fill_missing(PayoffMatrix& matrix, const Game& game, std::span<const PolicyRef> pop0,
                  std::span<const PolicyRef> pop1, int episodes_per_entry, uint64_t seed);

void save_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix_csv(const std::filesystem::path& path);
void save_counts_csv(const std::filesystem::path& path, const PayoffMatrix& m);
void load_counts_csv(const std::filesystem::path& path, PayoffMatrix& m);
void save_vector_csv(const std::filesystem::path& path, std::span<const double> v);
std::vector<double> load_vector_csv(const std::filesystem::path& path);

}  // namespace cpsro
