#include "kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rlvr {

double silverman_bandwidth(std::span<const double> data) {
  if (data.size() < 2) {
    throw std::invalid_argument("silverman_bandwidth: need at least 2 points");
  }
  const double n = static_cast<double>(data.size());
  double mean = 0.0;
  for (double x : data) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : data) ss += (x - mean) * (x - mean);
  const double sigma = std::sqrt(ss / (n - 1.0));
  return std::max(1.06 * sigma * std::pow(n, -0.2), 1e-3);
}

KdeCurve kde_curve(std::span<const double> data, double bandwidth, double lo, double hi,
                   int points) {
  if (data.empty()) throw std::invalid_argument("kde_curve: empty data");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde_curve: bandwidth must be > 0");
  if (points < 2) throw std::invalid_argument("kde_curve: need at least 2 grid points");
  if (!(hi > lo)) throw std::invalid_argument("kde_curve: grid range must be non-empty");

  KdeCurve curve;
  curve.bandwidth = bandwidth;
  curve.grid.resize(static_cast<size_t>(points));
  curve.density.resize(static_cast<size_t>(points));
  const double step = (hi - lo) / static_cast<double>(points - 1);
  const double norm =
      1.0 / (static_cast<double>(data.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (int i = 0; i < points; ++i) {
    const double x = lo + step * i;
    double sum = 0.0;
    for (double xi : data) {
      const double z = (x - xi) / bandwidth;
      sum += std::exp(-0.5 * z * z);
    }
    curve.grid[static_cast<size_t>(i)] = x;
    curve.density[static_cast<size_t>(i)] = norm * sum;
  }
  return curve;
}

KdeCurve kde_accuracy(std::span<const double> accuracies, std::optional<double> bandwidth,
                      int points) {
  if (accuracies.empty()) throw std::invalid_argument("kde_accuracy: empty data");
  const bool identical = std::all_of(accuracies.begin(), accuracies.end(),
                                     [&](double x) { return x == accuracies[0]; });
  double h = 0.0;
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw std::invalid_argument("kde_accuracy: bandwidth must be > 0");
    h = *bandwidth;
  } else {
    h = silverman_bandwidth(accuracies);
  }

  const auto [mn, mx] = std::minmax_element(accuracies.begin(), accuracies.end());
  const double lo = std::max(0.0, *mn - 3.0 * h);
  const double hi = std::min(1.0, *mx + 3.0 * h);
  KdeCurve curve = kde_curve(accuracies, h, lo, std::max(hi, lo + 1e-12),
                             std::max(points, 256));
  curve.degenerate = identical;
  return curve;
}

double trapezoid_integral(std::span<const double> grid, std::span<const double> density) {
  if (grid.size() != density.size() || grid.size() < 2) {
    throw std::invalid_argument("trapezoid_integral: need aligned grids of >= 2 points");
  }
  double total = 0.0;
  for (size_t i = 1; i < grid.size(); ++i) {
    total += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
  }
  return total;
}

}  // namespace rlvr
