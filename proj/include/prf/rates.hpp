#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prf/bias_engine.hpp"

namespace prf {

struct RatePoint {
    double k;
    double bias;
};

// Least-squares line through (log2 k, log2 bias).
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> points;  // (log2 k, log2 bias), sorted by k
};

// Needs at least three points with distinct k and positive bias.
RateFit fit_rate(std::span<const RatePoint> table);

std::vector<std::size_t> default_k_grid(bool drop_largest = false);

// One fitted curve of a sweep, or the reason it could not be fitted.
struct SweepFit {
    std::string label;
    std::optional<RateFit> fit;
    std::string error;
};

struct RateSweep {
    ModelKind model = ModelKind::Toy;
    std::size_t dim = 1;
    std::string function;
    std::vector<std::size_t> k_grid;  // leaf-count parameter as in spec_for_k
    std::vector<BiasReport> reports;
    std::vector<SweepFit> fits;  // tree, forest, and borderless counterparts when present
};

// estimate_bias over the grid (one derived seed per k), then fit_rate on each curve.
// `base` supplies hold-out extras (n', sigma, mtry); its kind, k and dim are overridden.
RateSweep run_rate_sweep(ModelKind model, std::size_t dim, const RegressionFn& f, std::span<const std::size_t> k_grid,
                         const BorderPolicy& policy, const BiasBudget& budget, std::uint64_t seed,
                         const ModelSpec* base = nullptr);

}  // namespace prf
