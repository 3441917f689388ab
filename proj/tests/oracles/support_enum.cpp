#include "oracles/support_enum.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace cpsro::oracles {
namespace {

constexpr double kEps = 1e-9;

// Solves A x = b in place; returns false when singular.
bool gaussian_solve(std::vector<std::vector<double>> a, std::vector<double> b,
                    std::vector<double>& x) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  x.resize(n);
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

// All size-k subsets of {0..n-1}.
void subsets(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> current;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(current.size()) == k) {
      out.push_back(current);
      return;
    }
    for (int i = start; i <= n - (k - static_cast<int>(current.size())); ++i) {
      current.push_back(i);
      rec(i + 1);
      current.pop_back();
    }
  };
  rec(0);
}

}  // namespace

SupportEnumResult support_enumeration_zero_sum(const Matrix& payoff) {
  const int n = payoff.rows, m = payoff.cols;
  for (int k = 1; k <= std::min(n, m); ++k) {
    std::vector<std::vector<int>> row_supports, col_supports;
    subsets(n, k, row_supports);
    subsets(m, k, col_supports);
    for (const auto& sr : row_supports) {
      for (const auto& sc : col_supports) {
        // Row mix x on sr makes the column player indifferent across sc:
        // sum_i x_i M[i][j] = v for j in sc, sum_i x_i = 1.
        std::vector<std::vector<double>> a(k + 1, std::vector<double>(k + 1, 0.0));
        std::vector<double> b(k + 1, 0.0);
        for (int j = 0; j < k; ++j) {
          for (int i = 0; i < k; ++i) a[j][i] = payoff.at(sr[i], sc[j]);
          a[j][k] = -1.0;
        }
        for (int i = 0; i < k; ++i) a[k][i] = 1.0;
        b[k] = 1.0;
        std::vector<double> xv;
        if (!gaussian_solve(a, b, xv)) continue;

        // Column mix y on sc makes the row player indifferent across sr.
        std::vector<std::vector<double>> a2(k + 1, std::vector<double>(k + 1, 0.0));
        std::vector<double> b2(k + 1, 0.0);
        for (int i = 0; i < k; ++i) {
          for (int j = 0; j < k; ++j) a2[i][j] = payoff.at(sr[i], sc[j]);
          a2[i][k] = -1.0;
        }
        for (int j = 0; j < k; ++j) a2[k][j] = 1.0;
        b2[k] = 1.0;
        std::vector<double> yv;
        if (!gaussian_solve(a2, b2, yv)) continue;

        const double value = xv[k];
        bool valid = std::abs(value - yv[k]) < 1e-7;
        for (int i = 0; i < k && valid; ++i) valid = xv[i] >= -kEps;
        for (int j = 0; j < k && valid; ++j) valid = yv[j] >= -kEps;
        if (!valid) continue;

        std::vector<double> x(n, 0.0), y(m, 0.0);
        for (int i = 0; i < k; ++i) x[sr[i]] = std::max(0.0, xv[i]);
        for (int j = 0; j < k; ++j) y[sc[j]] = std::max(0.0, yv[j]);
        double sx = 0.0, sy = 0.0;
        for (double v : x) sx += v;
        for (double v : y) sy += v;
        for (double& v : x) v /= sx;
        for (double& v : y) v /= sy;

        // No profitable deviation outside the supports.
        for (int i = 0; i < n && valid; ++i) {
          double v = 0.0;
          for (int j = 0; j < m; ++j) v += payoff.at(i, j) * y[j];
          valid = v <= value + 1e-7;
        }
        for (int j = 0; j < m && valid; ++j) {
          double v = 0.0;
          for (int i = 0; i < n; ++i) v += payoff.at(i, j) * x[i];
          valid = v >= value - 1e-7;
        }
        if (!valid) continue;

        return {true, value, std::move(x), std::move(y)};
      }
    }
  }
  return {};
}

}  // namespace cpsro::oracles
