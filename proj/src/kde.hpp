#pragma once

#include <optional>
#include <span>
#include <vector>

namespace rlvr {

struct KdeCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  bool degenerate = false;  // all-identical data; bandwidth floor in effect
};

// Silverman's rule h = 1.06 * sigma * n^(-1/5) with sample sigma, floored at
// 1e-3. Requires n >= 2.
double silverman_bandwidth(std::span<const double> data);

// Gaussian kernel sum evaluated on an explicit grid; no boundary handling.
KdeCurve kde_curve(std::span<const double> data, double bandwidth, double lo, double hi,
                   int points);

// Display curve for per-run accuracies: grid clipped to [0,1], spanning
// [max(0, min-3h), min(1, max+3h)] with at least 256 points.
KdeCurve kde_accuracy(std::span<const double> accuracies,
                      std::optional<double> bandwidth = std::nullopt, int points = 256);

double trapezoid_integral(std::span<const double> grid, std::span<const double> density);

}  // namespace rlvr
