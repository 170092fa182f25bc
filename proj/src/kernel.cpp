#include "prf/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "prf/errors.hpp"
#include "prf/functions.hpp"
#include "prf/parallel.hpp"

namespace prf {

std::vector<double> uniform_grid(std::size_t intervals) {
    if (intervals < 1) throw ParameterError("grid needs at least one interval");
    std::vector<double> t(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) t[i] = static_cast<double>(i) / static_cast<double>(intervals);
    return t;
}

KernelTable estimate_kernel(const ModelSpec& spec, double x, std::span<const double> t_grid, std::size_t n_u,
                            std::uint64_t seed) {
    if (spec.dim != 1) throw UnsupportedError("kernel estimation is one-dimensional");
    if (!(x >= 0.0 && x < 1.0)) throw DomainError("kernel anchor x must lie in [0, 1)");
    if (n_u < 1) throw ParameterError("kernel: need at least one partition");
    if (t_grid.size() < 2) throw ParameterError("kernel: need at least two grid points");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0 && t_grid[i] <= 1.0)) throw DomainError("kernel grid must lie in [0, 1]");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw ParameterError("kernel grid must be strictly increasing");
    }
    const RegressionFn target(FunctionKind::Sum, 1);
    const PartitionSource source(spec, target, SeedSpec(seed));
    const std::size_t m = t_grid.size();
    const double x_arr[1] = {x};

    // Trapezoid weights of the grid.
    std::vector<double> tw(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double half = 0.5 * (t_grid[i + 1] - t_grid[i]);
        tw[i] += half;
        tw[i + 1] += half;
    }

    const std::size_t chunks = std::min<std::size_t>(64, n_u);
    std::vector<double> sums(chunks * m, 0.0), sumsq(chunks * m, 0.0), mass(n_u, 0.0);
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t lo = c * n_u / chunks, hi = (c + 1) * n_u / chunks;
        Partition part(1);
        double* s = sums.data() + c * m;
        double* ss = sumsq.data() + c * m;
        for (std::size_t r = lo; r < hi; ++r) {
            source.draw(StreamKind::Kernel, r, part);
            const auto cell = part.cell(part.locate(x_arr));
            const double a = cell.lower[0], b = cell.upper[0];
            const double inv = 1.0 / (b - a);
            auto first = std::lower_bound(t_grid.begin(), t_grid.end(), a);
            auto last = std::upper_bound(t_grid.begin(), t_grid.end(), b);
            double total = 0.0;
            for (auto it = first; it != last; ++it) {
                const double t = *it;
                double w = inv;
                if ((t == a && a > 0.0) || (t == b && b < 1.0)) w = 0.5 * inv;
                const auto i = static_cast<std::size_t>(it - t_grid.begin());
                s[i] += w;
                ss[i] += w * w;
                total += tw[i] * w;
            }
            mass[r] = total;
        }
    });

    KernelTable table;
    table.model = spec;
    table.x = x;
    table.t_grid.assign(t_grid.begin(), t_grid.end());
    table.h.assign(m, 0.0);
    table.se.assign(m, 0.0);
    table.n_u = n_u;
    table.seed = seed;
    const double n = static_cast<double>(n_u);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0, ss = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            s += sums[c * m + i];
            ss += sumsq[c * m + i];
        }
        const double mean = s / n;
        table.h[i] = mean;
        table.se[i] = n_u > 1 ? std::sqrt(std::max(0.0, (ss - n * mean * mean) / (n - 1.0)) / n) : 0.0;
    }
    const double mass_mean = pairwise_sum(mass.data(), n_u) / n;
    double mss = 0.0;
    for (double v : mass) mss += (v - mass_mean) * (v - mass_mean);
    table.mass = {mass_mean, n_u > 1 ? std::sqrt(mss / (n - 1.0) / n) : 0.0};
    return table;
}

}  // namespace prf
