#include "cpsro/meta.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cpsro/error.hpp"

namespace cpsro {

PayoffMatrix PayoffMatrix::empty(int rows, int cols) {
  PayoffMatrix m;
  m.means = Matrix::zeros(rows, cols);
  m.counts.assign(static_cast<size_t>(rows) * cols, 0);
  return m;
}

bool PayoffMatrix::complete() const {
  for (int64_t c : counts)
    if (c == 0) return false;
  return true;
}

void PayoffMatrix::grow(int rows, int cols) {
  CPSRO_CHECK(rows >= means.rows && cols >= means.cols, "PayoffMatrix::grow cannot shrink");
  Matrix next = Matrix::zeros(rows, cols);
  std::vector<int64_t> next_counts(static_cast<size_t>(rows) * cols, 0);
  for (int r = 0; r < means.rows; ++r) {
    for (int c = 0; c < means.cols; ++c) {
      next.at(r, c) = means.at(r, c);
      next_counts[static_cast<size_t>(r) * cols + c] = count(r, c);
    }
  }
  means = std::move(next);
  counts = std::move(next_counts);
}

double matrix_exploitability(const Matrix& payoff, const MetaStrategy& row,
                             const MetaStrategy& col) {
  CPSRO_CHECK(static_cast<int>(row.size()) == payoff.rows &&
                  static_cast<int>(col.size()) == payoff.cols,
              "matrix_exploitability: dimension mismatch");
  double best_row = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < payoff.rows; ++r) {
    double v = 0.0;
    for (int c = 0; c < payoff.cols; ++c) v += payoff.at(r, c) * col[c];
    best_row = std::max(best_row, v);
  }
  double best_col = std::numeric_limits<double>::infinity();
  for (int c = 0; c < payoff.cols; ++c) {
    double v = 0.0;
    for (int r = 0; r < payoff.rows; ++r) v += payoff.at(r, c) * row[r];
    best_col = std::min(best_col, v);
  }
  return best_row - best_col;
}

namespace {

void normalize_or_uniform(std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  if (total <= 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / v.size());
  } else {
    for (double& x : v) x /= total;
  }
}

bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
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

// Refines a near-equilibrium by solving the indifference equations on the
// support the averaged strategies point at. Only adopted when the refined
// pair actually passes the exploitability check on the full matrix.
bool support_polish(const Matrix& payoff, const MetaStrategy& row_avg,
                    const MetaStrategy& col_avg, double tol, MetaStrategy& row_out,
                    MetaStrategy& col_out, double& expl_out) {
  const int n = payoff.rows, m = payoff.cols;
  for (double cut : {1e-2, 1e-3, 1e-4, 1e-5}) {
    std::vector<int> sr, sc;
    for (int r = 0; r < n; ++r)
      if (row_avg[r] > cut) sr.push_back(r);
    for (int c = 0; c < m; ++c)
      if (col_avg[c] > cut) sc.push_back(c);
    const int k = static_cast<int>(sr.size());
    if (k == 0 || k != static_cast<int>(sc.size())) continue;

    std::vector<std::vector<double>> a(k + 1, std::vector<double>(k + 1, 0.0));
    std::vector<double> b(k + 1, 0.0);
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < k; ++i) a[j][i] = payoff.at(sr[i], sc[j]);
      a[j][k] = -1.0;
    }
    for (int i = 0; i < k; ++i) a[k][i] = 1.0;
    b[k] = 1.0;
    std::vector<double> xv;
    if (!solve_square(a, b, xv)) continue;

    std::vector<std::vector<double>> a2(k + 1, std::vector<double>(k + 1, 0.0));
    std::vector<double> b2(k + 1, 0.0);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) a2[i][j] = payoff.at(sr[i], sc[j]);
      a2[i][k] = -1.0;
    }
    for (int j = 0; j < k; ++j) a2[k][j] = 1.0;
    b2[k] = 1.0;
    std::vector<double> yv;
    if (!solve_square(a2, b2, yv)) continue;

    bool nonneg = true;
    for (int i = 0; i < k && nonneg; ++i) nonneg = xv[i] >= -1e-9;
    for (int j = 0; j < k && nonneg; ++j) nonneg = yv[j] >= -1e-9;
    if (!nonneg) continue;

    MetaStrategy x(n, 0.0), y(m, 0.0);
    for (int i = 0; i < k; ++i) x[sr[i]] = std::max(0.0, xv[i]);
    for (int j = 0; j < k; ++j) y[sc[j]] = std::max(0.0, yv[j]);
    normalize_or_uniform(x);
    normalize_or_uniform(y);
    const double expl = matrix_exploitability(payoff, x, y);
    if (expl <= tol) {
      row_out = std::move(x);
      col_out = std::move(y);
      expl_out = expl;
      return true;
    }
  }
  return false;
}

}  // namespace

NashResult solve_meta_nash(const Matrix& payoff, double tol, int64_t max_iters) {
  const int n = payoff.rows, m = payoff.cols;
  CPSRO_CHECK(n > 0 && m > 0, "solve_meta_nash: empty matrix");
  NashResult result;
  if (n == 1 && m == 1) {
    result.row = {1.0};
    result.col = {1.0};
    result.converged = true;
    return result;
  }

  std::vector<double> x(n, 1.0 / n), y(m, 1.0 / m);
  std::vector<double> regret_row(n, 0.0), regret_col(m, 0.0);
  std::vector<double> x_avg(n, 0.0), y_avg(m, 0.0);
  std::vector<double> my(n), xm(m);
  double weight_sum = 0.0;

  MetaStrategy best_row, best_col;
  double best_expl = std::numeric_limits<double>::infinity();
  constexpr int64_t kCheckEvery = 64;

  for (int64_t t = 1; t <= max_iters; ++t) {
    // Row regrets against the current column strategy.
    for (int r = 0; r < n; ++r) {
      double v = 0.0;
      for (int c = 0; c < m; ++c) v += payoff.at(r, c) * y[c];
      my[r] = v;
    }
    double row_value = 0.0;
    for (int r = 0; r < n; ++r) row_value += x[r] * my[r];
    for (int r = 0; r < n; ++r) regret_row[r] = std::max(0.0, regret_row[r] + my[r] - row_value);
    x = regret_row;
    normalize_or_uniform(x);

    // Column regrets against the updated row strategy (alternating update).
    for (int c = 0; c < m; ++c) {
      double v = 0.0;
      for (int r = 0; r < n; ++r) v += payoff.at(r, c) * x[r];
      xm[c] = v;
    }
    double col_value = 0.0;
    for (int c = 0; c < m; ++c) col_value += y[c] * xm[c];
    for (int c = 0; c < m; ++c) regret_col[c] = std::max(0.0, regret_col[c] + col_value - xm[c]);
    y = regret_col;
    normalize_or_uniform(y);

    const double w = static_cast<double>(t) * static_cast<double>(t);
    for (int r = 0; r < n; ++r) x_avg[r] += w * x[r];
    for (int c = 0; c < m; ++c) y_avg[c] += w * y[c];
    weight_sum += w;

    if (t % kCheckEvery == 0 || t == max_iters) {
      MetaStrategy row(n), col(m);
      for (int r = 0; r < n; ++r) row[r] = x_avg[r] / weight_sum;
      for (int c = 0; c < m; ++c) col[c] = y_avg[c] / weight_sum;
      const double expl = matrix_exploitability(payoff, row, col);
      if (expl < best_expl) {
        best_expl = expl;
        best_row = row;
        best_col = col;
      }
      if (best_expl > tol) {
        MetaStrategy pr, pc;
        double pe;
        if (support_polish(payoff, row, col, tol, pr, pc, pe) && pe < best_expl) {
          best_expl = pe;
          best_row = std::move(pr);
          best_col = std::move(pc);
        }
      }
      if (best_expl <= tol) {
        result.row = best_row;
        result.col = best_col;
        result.exploitability = best_expl;
        result.converged = true;
        result.iterations = t;
        return result;
      }
    }
  }

  result.row = best_row;
  result.col = best_col;
  result.exploitability = best_expl;
  result.converged = false;
  result.iterations = max_iters;
  return result;
}

void fill_missing(PayoffMatrix& matrix, const Game& game, std::span<const PolicyRef> pop0,
                  std::span<const PolicyRef> pop1, int episodes_per_entry, uint64_t seed) {
  CPSRO_CHECK(!pop0.empty() && !pop1.empty(), "fill_missing: empty population");
  CPSRO_CHECK(episodes_per_entry >= 1, "fill_missing: episodes_per_entry must be >= 1");
  CPSRO_CHECK(matrix.means.rows == static_cast<int>(pop0.size()) &&
                  matrix.means.cols == static_cast<int>(pop1.size()),
              "fill_missing: matrix does not match populations");
  std::vector<std::pair<int, int>> missing;
  for (int r = 0; r < matrix.means.rows; ++r) {
    for (int c = 0; c < matrix.means.cols; ++c) {
      if (matrix.count(r, c) == 0) missing.emplace_back(r, c);
    }
  }
  // Entries are independent and each draws its own rng stream from
  // (seed, row, col), so the parallel fill is byte-identical to a serial one.
  const auto fill_entry = [&](std::pair<int, int> entry) {
    const auto [r, c] = entry;
    Rng rng(derive_seed(seed, {0x66696c6cULL, static_cast<uint64_t>(r), static_cast<uint64_t>(c)}));
    double total = 0.0;
    for (int episode = 0; episode < episodes_per_entry; ++episode) {
      total += play_episode(game, *pop0[r], *pop1[c], rng);
    }
    matrix.means.at(r, c) = total / episodes_per_entry;
    matrix.count(r, c) = episodes_per_entry;
  };
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), missing.size());
  if (workers <= 1 || missing.size() <= 1) {
    for (const auto& entry : missing) fill_entry(entry);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next.fetch_add(1); i < missing.size(); i = next.fetch_add(1)) {
        fill_entry(missing[i]);
      }
    });
  }
  for (auto& t : pool) t.join();
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_matrix_csv: cannot open " + path.string());
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      out << format_double(m.at(r, c)) << (c + 1 < m.cols ? "," : "");
    }
    out << "\n";
  }
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_matrix_csv: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && rows.front().size() != row.size()) {
      throw ConfigError("load_matrix_csv: ragged rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("load_matrix_csv: empty file " + path.string());
  Matrix m = Matrix::zeros(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
  return m;
}

void save_counts_csv(const std::filesystem::path& path, const PayoffMatrix& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_counts_csv: cannot open " + path.string());
  for (int r = 0; r < m.means.rows; ++r) {
    for (int c = 0; c < m.means.cols; ++c) {
      out << m.count(r, c) << (c + 1 < m.means.cols ? "," : "");
    }
    out << "\n";
  }
}

void load_counts_csv(const std::filesystem::path& path, PayoffMatrix& m) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_counts_csv: cannot open " + path.string());
  std::string line;
  int r = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) m.count(r, c++) = std::stoll(cell);
    CPSRO_CHECK(c == m.means.cols, "load_counts_csv: column mismatch");
    r++;
  }
  CPSRO_CHECK(r == m.means.rows, "load_counts_csv: row mismatch");
}

void save_vector_csv(const std::filesystem::path& path, std::span<const double> v) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_vector_csv: cannot open " + path.string());
  for (double x : v) out << format_double(x) << "\n";
}

std::vector<double> load_vector_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_vector_csv: cannot open " + path.string());
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) v.push_back(std::stod(line));
  }
  return v;
}

}  // namespace cpsro
