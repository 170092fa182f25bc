#include "prf/rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "prf/errors.hpp"

namespace prf {

RateFit fit_rate(std::span<const RatePoint> table) {
    if (table.size() < 3) throw ParameterError("fit_rate needs at least three points");
    std::vector<RatePoint> pts(table.begin(), table.end());
    std::sort(pts.begin(), pts.end(), [](const RatePoint& a, const RatePoint& b) { return a.k < b.k; });
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].k > 0.0)) throw ParameterError("fit_rate: k must be positive");
        if (i > 0 && pts[i].k == pts[i - 1].k) throw ParameterError("fit_rate: k values must be distinct");
        if (!(pts[i].bias > 0.0)) {
            std::ostringstream os;
            os << "fit_rate: non-positive bias " << pts[i].bias << " at k = " << pts[i].k;
            throw DomainError(os.str());
        }
    }
    RateFit fit;
    for (const auto& p : pts) fit.points.emplace_back(std::log2(p.k), std::log2(p.bias));
    const double n = static_cast<double>(pts.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [u, v] : fit.points) mx += u, my += v;
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [u, v] : fit.points) {
        sxx += (u - mx) * (u - mx);
        sxy += (u - mx) * (v - my);
        syy += (v - my) * (v - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (const auto& [u, v] : fit.points) {
        const double r = v - (fit.intercept + fit.slope * u);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

std::vector<std::size_t> default_k_grid(bool drop_largest) {
    std::vector<std::size_t> grid{32, 64, 128, 256, 512};
    if (drop_largest) grid.pop_back();
    return grid;
}

namespace {

SweepFit fit_curve(std::string label, const std::vector<std::size_t>& ks, const std::vector<double>& values) {
    SweepFit out;
    out.label = std::move(label);
    std::vector<RatePoint> pts;
    for (std::size_t i = 0; i < ks.size(); ++i) pts.push_back({static_cast<double>(ks[i]), values[i]});
    try {
        out.fit = fit_rate(pts);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace

RateSweep run_rate_sweep(ModelKind model, std::size_t dim, const RegressionFn& f, std::span<const std::size_t> k_grid,
                         const BorderPolicy& policy, const BiasBudget& budget, std::uint64_t seed,
                         const ModelSpec* base) {
    RateSweep sweep;
    sweep.model = model;
    sweep.dim = dim;
    sweep.function = std::string(f.name());
    sweep.k_grid.assign(k_grid.begin(), k_grid.end());
    const SeedSpec seeds(seed);
    for (std::size_t k : k_grid) {
        ModelSpec spec = spec_for_k(model, k, dim);
        if (base != nullptr) {
            spec.n_prime = base->n_prime;
            spec.sigma = base->sigma;
            spec.mtry = base->mtry;
            spec.weights = base->weights;
            spec.validate();
        }
        BiasBudget b = budget;
        if (budget.n_u_inf == 0) b.n_u_inf = default_n_u_inf(spec);
        sweep.reports.push_back(estimate_bias(spec, f, policy, {}, b, seeds.child(k).master()));
    }
    std::vector<double> tree, forest, tree_bl, forest_bl;
    for (const auto& r : sweep.reports) {
        tree.push_back(r.full.b1.value);
        forest.push_back(r.full.binf.value);
        if (r.borderless) {
            tree_bl.push_back(r.borderless->b1.value);
            forest_bl.push_back(r.borderless->binf.value);
        }
    }
    sweep.fits.push_back(fit_curve("tree", sweep.k_grid, tree));
    sweep.fits.push_back(fit_curve("forest", sweep.k_grid, forest));
    if (!tree_bl.empty()) {
        sweep.fits.push_back(fit_curve("tree_borderless", sweep.k_grid, tree_bl));
        sweep.fits.push_back(fit_curve("forest_borderless", sweep.k_grid, forest_bl));
    }
    return sweep;
}

}  // namespace prf
