#include "prf/models.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "prf/errors.hpp"

namespace prf {

namespace {

constexpr std::array<std::pair<ModelKind, std::string_view>, 6> kModelNames{{
    {ModelKind::Toy, "toy"},
    {ModelKind::Purf, "purf"},
    {ModelKind::Bprf, "bprf"},
    {ModelKind::Ubprf, "ubprf"},
    {ModelKind::Midpoint, "midpoint"},
    {ModelKind::Holdout, "holdout"},
}};

// Uniform point strictly inside (lo, hi).
double interior_point(double lo, double hi, Engine& rng) {
    for (;;) {
        const double t = lo + uniform01(rng) * (hi - lo);
        if (t > lo && t < hi) return t;
    }
}

void reset_unit(Partition& out, std::size_t d) {
    out.clear(d);
    const std::vector<double> lo(d, 0.0), hi(d, 1.0);
    out.add_cell(lo, hi);
}

std::size_t draw_coord(std::size_t d, Engine& rng) { return d == 1 ? 0 : uniform_index(rng, d); }

}  // namespace

std::string_view model_name(ModelKind kind) {
    for (const auto& [k, name] : kModelNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

ModelKind parse_model(std::string_view name) {
    for (const auto& [k, n] : kModelNames) {
        if (n == name) return k;
    }
    std::ostringstream os;
    os << "unknown model '" << name << "'; valid choices:";
    for (const auto& entry : kModelNames) os << ' ' << entry.second;
    throw ParameterError(os.str());
}

std::size_t ModelSpec::effective_mtry() const {
    return mtry != 0 ? mtry : std::max<std::size_t>(dim / 3, 1);
}

std::size_t ModelSpec::effective_n_prime() const { return n_prime != 0 ? n_prime : k * k; }

std::vector<double> ModelSpec::effective_weights() const {
    if (!weights.empty()) return weights;
    return std::vector<double>(dim, 1.0 / static_cast<double>(dim));
}

void ModelSpec::validate() const {
    auto fail = [this](const std::string& msg) {
        throw ParameterError(std::string(model_name(kind)) + ": " + msg);
    };
    if (dim == 0) fail("d must be at least 1");
    switch (kind) {
        case ModelKind::Toy:
            if (k < 2) fail("k must be at least 2");
            if (dim != 1) fail("the toy model is one-dimensional");
            break;
        case ModelKind::Purf:
            if (k < 1) fail("k must be at least 1");
            if (dim != 1) fail("PURF is one-dimensional");
            break;
        case ModelKind::Bprf:
        case ModelKind::Midpoint:
            if (k > 40) fail("depth p above 40 is not supported");
            if (kind == ModelKind::Midpoint) {
                const auto w = effective_weights();
                if (w.size() != dim) fail("weights must have one entry per coordinate");
                double total = 0.0;
                for (double v : w) {
                    if (!(v >= 0.0)) fail("weights must be non-negative");
                    total += v;
                }
                if (std::abs(total - 1.0) > 1e-12) fail("weights must sum to 1");
            }
            break;
        case ModelKind::Ubprf:
            break;
        case ModelKind::Holdout:
            if (k < 1) fail("k must be at least 1");
            if (effective_n_prime() < k) fail("n' must be at least k");
            if (effective_mtry() < 1 || effective_mtry() > dim) fail("mtry must lie in [1, d]");
            if (!(sigma >= 0.0)) fail("sigma must be non-negative");
            break;
    }
}

std::size_t ModelSpec::leaf_count() const {
    switch (kind) {
        case ModelKind::Toy:
        case ModelKind::Purf:
        case ModelKind::Ubprf:
            return k + 1;
        case ModelKind::Bprf:
        case ModelKind::Midpoint:
            return std::size_t{1} << k;
        case ModelKind::Holdout:
            return k;
    }
    return 0;
}

ModelSpec spec_for_k(ModelKind kind, std::size_t k, std::size_t dim) {
    ModelSpec spec;
    spec.kind = kind;
    spec.dim = dim;
    if (kind == ModelKind::Bprf || kind == ModelKind::Midpoint) {
        if (k == 0 || !std::has_single_bit(k)) {
            throw ParameterError(std::string(model_name(kind)) + ": k must be a power of two");
        }
        spec.k = static_cast<std::size_t>(std::countr_zero(k));
    } else {
        spec.k = k;
    }
    spec.validate();
    return spec;
}

void toy_partition(std::size_t k, double shift, Partition& out) {
    if (k < 2) throw ParameterError("toy: k must be at least 2");
    if (!(shift >= 0.0 && shift < 1.0)) throw ParameterError("toy: shift must lie in [0,1)");
    out.clear(1);
    const double kd = static_cast<double>(k);
    double lo = 0.0;
    for (std::size_t i = 1; i <= k + 1; ++i) {
        const double hi = i <= k ? (static_cast<double>(i) - shift) / kd : 1.0;
        if (hi > lo) {
            const double l[1] = {lo}, h[1] = {std::min(hi, 1.0)};
            out.add_cell(l, h);
            lo = h[0];
        }
        if (lo >= 1.0) break;
    }
    out.mark_grid((1.0 - shift) / kd, 1.0 / kd);
}

void sample_toy(std::size_t k, Engine& rng, Partition& out) { toy_partition(k, uniform01(rng), out); }

void sample_purf(std::size_t k, Engine& rng, Partition& out) {
    if (k < 1) throw ParameterError("purf: k must be at least 1");
    std::vector<double> xi(k);
    for (;;) {
        for (auto& v : xi) v = uniform01(rng);
        std::sort(xi.begin(), xi.end());
        // Ties and a zero breakpoint have probability ~k^2 2^-53; redraw.
        if (xi.front() > 0.0 && std::adjacent_find(xi.begin(), xi.end()) == xi.end()) break;
    }
    out.clear(1);
    double lo = 0.0;
    for (std::size_t i = 0; i <= k; ++i) {
        const double l[1] = {lo}, h[1] = {i < k ? xi[i] : 1.0};
        out.add_cell(l, h);
        lo = h[0];
    }
    out.mark_breakpoints();
}

void sample_bprf(std::size_t p, std::size_t d, Engine& rng, Partition& out) {
    reset_unit(out, d);
    for (std::size_t level = 0; level < p; ++level) {
        const std::size_t m = out.size();
        for (std::size_t c = 0; c < m; ++c) {
            const std::size_t j = draw_coord(d, rng);
            const double lo = out.cell(c).lower[j], hi = out.cell(c).upper[j];
            out.split_cell(c, j, interior_point(lo, hi, rng));
        }
    }
}

void sample_ubprf(std::size_t k, std::size_t d, Engine& rng, Partition& out) {
    reset_unit(out, d);
    for (std::size_t step = 0; step < k; ++step) {
        const std::size_t c = uniform_index(rng, out.size());
        const std::size_t j = draw_coord(d, rng);
        const double lo = out.cell(c).lower[j], hi = out.cell(c).upper[j];
        out.split_cell(c, j, interior_point(lo, hi, rng));
    }
}

void sample_midpoint(std::size_t p, std::size_t d, const std::vector<double>& weights, Engine& rng,
                     Partition& out) {
    if (weights.size() != d) throw ParameterError("midpoint: weights must have one entry per coordinate");
    std::vector<double> cum(d);
    std::partial_sum(weights.begin(), weights.end(), cum.begin());
    const bool single = std::count_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; }) == 1;
    auto pick = [&]() -> std::size_t {
        if (single) {
            return static_cast<std::size_t>(
                std::find_if(weights.begin(), weights.end(), [](double w) { return w > 0.0; }) - weights.begin());
        }
        const double u = uniform01(rng) * cum.back();
        for (std::size_t j = 0; j < d; ++j) {
            if (weights[j] > 0.0 && u < cum[j]) return j;
        }
        for (std::size_t j = d; j-- > 0;) {
            if (weights[j] > 0.0) return j;
        }
        return 0;
    };
    reset_unit(out, d);
    for (std::size_t level = 0; level < p; ++level) {
        const std::size_t m = out.size();
        for (std::size_t c = 0; c < m; ++c) {
            const std::size_t j = pick();
            const double lo = out.cell(c).lower[j], hi = out.cell(c).upper[j];
            out.split_cell(c, j, 0.5 * (lo + hi));
        }
    }
}

namespace {

struct HoldoutLeaf {
    std::vector<std::uint32_t> points;
    bool splittable = false;
    double gain = 0.0;
    std::size_t coord = 0;
    double threshold = 0.0;
};

// Best CART split of one leaf over `mtry` coordinates drawn without replacement.
void best_split(HoldoutLeaf& leaf, const Dataset& data, std::size_t mtry, Engine& rng,
                std::vector<std::size_t>& coords) {
    leaf.splittable = false;
    const std::size_t n = leaf.points.size();
    if (n < 2) return;
    const std::size_t d = data.dim;
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    for (std::size_t i = 0; i < mtry && d > 1; ++i) {
        const std::size_t j = i + uniform_index(rng, d - i);
        std::swap(coords[i], coords[j]);
    }
    double total = 0.0;
    for (auto idx : leaf.points) total += data.ys[idx];
    const double base = total * total / static_cast<double>(n);

    std::vector<std::uint32_t> order(leaf.points);
    for (std::size_t c = 0; c < mtry; ++c) {
        const std::size_t j = coords[c];
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return data.xs[a * d + j] < data.xs[b * d + j];
        });
        double left = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            left += data.ys[order[i - 1]];
            const double lo = data.xs[order[i - 1] * d + j];
            const double hi = data.xs[order[i] * d + j];
            if (!(hi > lo)) continue;
            const double t = 0.5 * (lo + hi);
            if (!(t > lo && t <= hi)) continue;
            const double nl = static_cast<double>(i), nr = static_cast<double>(n - i);
            const double right = total - left;
            const double gain = left * left / nl + right * right / nr - base;
            if (!leaf.splittable || gain > leaf.gain) {
                leaf.splittable = true;
                leaf.gain = gain;
                leaf.coord = j;
                leaf.threshold = t;
            }
        }
    }
}

}  // namespace

void sample_holdout(std::size_t k, const Dataset& data, std::size_t mtry, Engine& rng, Partition& out) {
    const std::size_t d = data.dim;
    if (k < 1) throw ParameterError("holdout: k must be at least 1");
    if (data.size() < k) throw ParameterError("holdout: the sample has fewer than k points");
    if (mtry < 1 || mtry > d) throw ParameterError("holdout: mtry must lie in [1, d]");
    reset_unit(out, d);
    if (k == 1) return;

    std::vector<std::size_t> coords(d);
    std::vector<HoldoutLeaf> leaves(1);
    leaves[0].points.resize(data.size());
    std::iota(leaves[0].points.begin(), leaves[0].points.end(), std::uint32_t{0});
    best_split(leaves[0], data, mtry, rng, coords);

    // Max-gain leaf first; ties go to the lower cell index.
    auto worse = [&](std::size_t a, std::size_t b) {
        if (leaves[a].gain != leaves[b].gain) return leaves[a].gain < leaves[b].gain;
        return a > b;
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> queue(worse);
    if (leaves[0].splittable) queue.push(0);

    while (out.size() < k && !queue.empty()) {
        const std::size_t c = queue.top();
        queue.pop();
        const std::size_t j = leaves[c].coord;
        const double t = leaves[c].threshold;
        const std::size_t r = out.split_cell(c, j, t);
        HoldoutLeaf right;
        std::vector<std::uint32_t> left_pts;
        for (auto idx : leaves[c].points) {
            (data.xs[idx * d + j] >= t ? right.points : left_pts).push_back(idx);
        }
        leaves[c].points = std::move(left_pts);
        leaves.push_back(std::move(right));
        best_split(leaves[c], data, mtry, rng, coords);
        best_split(leaves[r], data, mtry, rng, coords);
        if (leaves[c].splittable) queue.push(c);
        if (leaves[r].splittable) queue.push(r);
    }
}

void sample_partition(const ModelSpec& spec, Engine& rng, Partition& out, const Dataset* holdout_data) {
    switch (spec.kind) {
        case ModelKind::Toy:
            sample_toy(spec.k, rng, out);
            return;
        case ModelKind::Purf:
            sample_purf(spec.k, rng, out);
            return;
        case ModelKind::Bprf:
            sample_bprf(spec.k, spec.dim, rng, out);
            return;
        case ModelKind::Ubprf:
            sample_ubprf(spec.k, spec.dim, rng, out);
            return;
        case ModelKind::Midpoint:
            sample_midpoint(spec.k, spec.dim, spec.effective_weights(), rng, out);
            return;
        case ModelKind::Holdout:
            if (holdout_data == nullptr) throw ParameterError("holdout: no hold-out sample supplied");
            if (holdout_data->dim != spec.dim) throw ParameterError("holdout: sample dimension differs from d");
            sample_holdout(spec.k, *holdout_data, spec.effective_mtry(), rng, out);
            return;
    }
}

Partition sample_partition(const ModelSpec& spec, Engine& rng, const Dataset* holdout_data) {
    Partition p(spec.dim);
    sample_partition(spec, rng, p, holdout_data);
    return p;
}

}  // namespace prf
