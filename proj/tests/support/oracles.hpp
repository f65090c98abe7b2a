#pragma once

// Reference implementations used only by tests. Each one is written
// differently from the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

// Metrics via a histogram of absolute differences.
struct MetricTriple {
  double mae = 0.0;
  double acc = 0.0;
  double within1 = 0.0;
};

inline MetricTriple metrics(const std::vector<int>& truth, const std::vector<int>& pred) {
  std::map<int, long> histogram;
  for (std::size_t i = 0; i < truth.size(); ++i) histogram[std::abs(pred[i] - truth[i])]++;
  long total = 0, weighted = 0, exact = 0, near = 0;
  for (const auto& [d, count] : histogram) {
    total += count;
    weighted += d * count;
    if (d == 0) exact += count;
    if (d <= 1) near += count;
  }
  return {static_cast<double>(weighted) / total, static_cast<double>(exact) / total,
          static_cast<double>(near) / total};
}

// Benjamini-Hochberg without sorting: k* = max{k : #{p_i <= k q / m} >= k};
// reject every p_i <= k* q / m. Every cut point k = 0..m is examined.
inline std::vector<bool> bh_exhaustive(const std::vector<double>& p, double q) {
  const std::size_t m = p.size();
  std::size_t best = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    const double threshold = static_cast<double>(k) * q / static_cast<double>(m);
    std::size_t below = 0;
    for (double v : p) below += v <= threshold ? 1 : 0;
    if (below >= k) best = k;
  }
  std::vector<bool> reject(m, false);
  if (best == 0) return reject;
  const double threshold = static_cast<double>(best) * q / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) reject[i] = p[i] <= threshold;
  return reject;
}

// Nearest-rank percentile by scanning: smallest sample value v with
// #{x <= v} * den >= num * n.
inline double nearest_rank(const std::vector<double>& values, std::uint64_t num, std::uint64_t den) {
  double best = INFINITY;
  for (double v : values) {
    std::uint64_t at_most = 0;
    for (double x : values) at_most += x <= v ? 1 : 0;
    if (at_most * den >= num * values.size() && v < best) best = v;
  }
  return best;
}

// Ordinary least squares with intercept via normal equations and Gaussian
// elimination with partial pivoting. Returns {b, w_1..w_d}.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  const std::size_t d = x.at(0).size() + 1;
  std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
  for (std::size_t r = 0; r < x.size(); ++r) {
    std::vector<double> row{1.0};
    row.insert(row.end(), x[r].begin(), x[r].end());
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) a[i][j] += row[i] * row[j];
      a[i][d] += row[i] * y[r];
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < d; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[pivot][c])) pivot = r;
    }
    std::swap(a[c], a[pivot]);
    if (std::fabs(a[c][c]) < 1e-12) throw std::runtime_error("singular system");
    for (std::size_t r = 0; r < d; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= d; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> beta(d);
  for (std::size_t i = 0; i < d; ++i) beta[i] = a[i][d] / a[i][i];
  return beta;
}

// Exploration quota for a stratum: nearest integer to num*n/den, ties to even,
// from exact integer arithmetic.
inline long quota(long num, long den, long n) {
  const long whole = num * n / den;
  const long rem2 = 2 * (num * n - whole * den);  // compare 2*remainder to den
  if (rem2 > den) return whole + 1;
  if (rem2 < den) return whole;
  return whole % 2 == 0 ? whole : whole + 1;
}

// Synthetic outcome convention restated as an explicit table.
inline int mrs_from(int nihss_discharge, double age) {
  static const int table[43] = {0, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 5,
                                5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5};
  const int base = table[std::clamp(nihss_discharge, 0, 42)];
  return std::min(6, base + (age > 80 ? 1 : 0));
}

}  // namespace oracle
