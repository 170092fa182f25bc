#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace prf {

// n points of [0,1)^d stored row-major, with responses and the noise level used to draw them.
struct Dataset {
    std::size_t dim = 1;
    std::vector<double> xs;
    std::vector<double> ys;
    double sigma = 0.0;

    std::size_t size() const { return ys.size(); }
    std::span<const double> point(std::size_t i) const { return {xs.data() + i * dim, dim}; }
};

}  // namespace prf
