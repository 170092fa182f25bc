#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prf/bias_engine.hpp"
#include "prf/models.hpp"

namespace prf {

// Monte Carlo estimate of h(t, x) = E[1{t in I_U(x)} / |I_U(x)|] on a grid of t.
struct KernelTable {
    ModelSpec model;
    double x = 0.5;
    std::vector<double> t_grid;
    std::vector<double> h;
    std::vector<double> se;
    std::size_t n_u = 0;
    std::uint64_t seed = 0;
    Estimate mass;  // trapezoid integral of h over the grid
};

// t_i = i / intervals, i = 0..intervals.
std::vector<double> uniform_grid(std::size_t intervals = 512);

// One-dimensional models only. A grid point on an interior cell boundary
// counts one half, so the trapezoid mass is exact on aligned grids.
KernelTable estimate_kernel(const ModelSpec& spec, double x, std::span<const double> t_grid, std::size_t n_u,
                            std::uint64_t seed);

}  // namespace prf
