#pragma once

#include <span>

#include "mckv/density.hpp"

namespace mckv {

// 1-d Wasserstein-1 distance, the L1 distance between quantile functions.
// Samples need not be pre-sorted; equal-size samples reduce to the mean of
// |a_(i) - b_(i)|. Throws ConfigError on empty input.
double wasserstein1(std::span<const double> a, std::span<const double> b);
double wasserstein1(std::span<const double> sample, const GridDensity& density);
double wasserstein1(const GridDensity& a, const GridDensity& b);

}  // namespace mckv
