#include "prf/bias_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "prf/errors.hpp"
#include "prf/estimators.hpp"
#include "prf/oracles.hpp"
#include "prf/parallel.hpp"

namespace prf {

namespace {

constexpr std::size_t kMinInfPartitions = 4;

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : pairwise_sum(v.data(), v.size()) / static_cast<double>(v.size());
}

// Standard error of the mean of `v` from `batches` contiguous batch means.
double batch_se(const std::vector<double>& v, std::size_t batches) {
    const std::size_t n = v.size();
    batches = std::min(batches, n);
    if (batches < 2) return 0.0;
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches, hi = (b + 1) * n / batches;
        means[b] = pairwise_sum(v.data() + lo, hi - lo) / static_cast<double>(hi - lo);
    }
    const double m = mean_of(means);
    double ss = 0.0;
    for (double x : means) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

double jackknife_var(const std::vector<double>& leave_out) {
    const std::size_t g = leave_out.size();
    if (g < 2) return 0.0;
    const double m = mean_of(leave_out);
    double ss = 0.0;
    for (double x : leave_out) ss += (x - m) * (x - m);
    return ss * static_cast<double>(g - 1) / static_cast<double>(g);
}

Estimate sample_mean(const std::vector<double>& v) {
    Estimate e{mean_of(v), 0.0};
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - e.value) * (x - e.value);
        e.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return e;
}

// n points uniform on [lo, hi)^d, row-major. Stratified mode jitters a regular grid (d = 1).
std::vector<double> draw_points(Engine rng, std::size_t n, std::size_t d, double lo, double hi, bool stratified) {
    std::vector<double> xs(n * d);
    const double width = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double u = stratified ? (static_cast<double>(i) + uniform01(rng)) / static_cast<double>(n)
                                        : uniform01(rng);
            double v = lo + width * u;
            if (v >= hi) v = std::nextafter(hi, lo);
            xs[i * d + j] = v;
        }
    }
    return xs;
}

// Evaluates the projection of f on a partition at many points, computing each
// cell average at most once.
class Projector {
public:
    void run(const Partition& p, const RegressionFn& f, std::span<const double> xs, std::size_t d,
             std::span<double> out) {
        cache_.assign(p.size(), 0.0);
        known_.assign(p.size(), 0);
        const std::size_t n = xs.size() / d;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = p.locate(xs.subspan(i * d, d));
            if (!known_[c]) {
                cache_[c] = f.cell_average(p.cell(c));
                known_[c] = 1;
            }
            out[i] = cache_[c];
        }
    }

private:
    std::vector<double> cache_;
    std::vector<unsigned char> known_;
};

// Per-group, per-x sums of e - c and (e - c)^2 over the partitions of each group,
// where e = s_tilde_U(x) - s(x) and c = shift[x] is zero or a pilot value of e.
struct PassSums {
    std::size_t n_x = 0;
    std::size_t groups = 0;
    std::vector<std::size_t> count;
    std::vector<double> sum, sumsq;
    std::vector<double> shift;

    double total_sum(std::size_t i) const {
        double s = 0.0;
        for (std::size_t g = 0; g < groups; ++g) s += sum[g * n_x + i];
        return s;
    }
    double total_sumsq(std::size_t i) const {
        double s = 0.0;
        for (std::size_t g = 0; g < groups; ++g) s += sumsq[g * n_x + i];
        return s;
    }
    std::size_t total_count() const { return std::accumulate(count.begin(), count.end(), std::size_t{0}); }
};

// With `centred`, e is shifted by its value under partition 0 so that the
// variance of e across partitions does not cancel catastrophically.
PassSums run_pass(const PartitionSource& source, StreamKind kind, std::size_t n_partitions, std::size_t groups,
                  const RegressionFn& f, std::span<const double> xs, std::span<const double> sx, bool centred) {
    const std::size_t d = f.dim();
    PassSums out;
    out.n_x = sx.size();
    out.shift.assign(out.n_x, 0.0);
    if (centred) {
        Projector proj;
        proj.run(source.draw(kind, 0), f, xs, d, out.shift);
        for (std::size_t i = 0; i < out.n_x; ++i) out.shift[i] -= sx[i];
    }
    out.groups = std::max<std::size_t>(1, std::min(groups, n_partitions));
    out.count.assign(out.groups, 0);
    out.sum.assign(out.groups * out.n_x, 0.0);
    out.sumsq.assign(out.groups * out.n_x, 0.0);
    parallel_for(out.groups, [&](std::size_t g) {
        const std::size_t lo = g * n_partitions / out.groups, hi = (g + 1) * n_partitions / out.groups;
        Partition part(d);
        Projector proj;
        std::vector<double> values(out.n_x);
        double* sum = out.sum.data() + g * out.n_x;
        double* sumsq = out.sumsq.data() + g * out.n_x;
        for (std::size_t u = lo; u < hi; ++u) {
            source.draw(kind, u, part);
            proj.run(part, f, xs, d, values);
            for (std::size_t i = 0; i < out.n_x; ++i) {
                const double e = values[i] - sx[i] - out.shift[i];
                sum[i] += e;
                sumsq[i] += e * e;
            }
        }
        out.count[g] = hi - lo;
    });
    return out;
}

// Per-x quantities on one region together with leave-one-group-out region means.
struct RegionData {
    double scale = 1.0;  // region volume
    std::size_t batches = 20;
    std::vector<double> b1, binf, binf_raw, vdirect;
    std::vector<double> b1_jk, binf_jk, vdirect_jk;
};

// s and ss are sums of e - c and (e - c)^2 over m partitions.
void inf_stats(double s, double ss, double m, double c, double& binf, double& raw, double& var) {
    const double centred_mean = s / m;
    var = std::max(0.0, (ss - m * centred_mean * centred_mean) / (m - 1.0));
    const double mean = c + centred_mean;
    raw = mean * mean;
    binf = raw - var / m;
}

RegionData region_data(const PassSums& tree, const PassSums& inf, std::size_t i0, std::size_t i1, double scale,
                       std::size_t batches) {
    RegionData r;
    r.scale = scale;
    r.batches = batches;
    const std::size_t n = i1 - i0;
    const double nt = static_cast<double>(tree.total_count());
    const double ni = static_cast<double>(inf.total_count());
    r.b1.resize(n);
    r.binf.resize(n);
    r.binf_raw.resize(n);
    r.vdirect.resize(n);
    std::vector<double> tot_tree_sq(n), tot_inf(n), tot_inf_sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        tot_tree_sq[i] = tree.total_sumsq(i0 + i);
        tot_inf[i] = inf.total_sum(i0 + i);
        tot_inf_sq[i] = inf.total_sumsq(i0 + i);
        r.b1[i] = tot_tree_sq[i] / nt;
        inf_stats(tot_inf[i], tot_inf_sq[i], ni, inf.shift[i0 + i], r.binf[i], r.binf_raw[i], r.vdirect[i]);
    }
    std::vector<double> scratch(n), scratch2(n);
    for (std::size_t g = 0; g < tree.groups; ++g) {
        const double m = nt - static_cast<double>(tree.count[g]);
        if (m < 1.0 || tree.groups < 2) break;
        for (std::size_t i = 0; i < n; ++i) scratch[i] = (tot_tree_sq[i] - tree.sumsq[g * tree.n_x + i0 + i]) / m;
        r.b1_jk.push_back(mean_of(scratch));
    }
    for (std::size_t g = 0; g < inf.groups; ++g) {
        const double m = ni - static_cast<double>(inf.count[g]);
        if (m < 2.0 || inf.groups < 2) {
            r.binf_jk.clear();
            r.vdirect_jk.clear();
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double raw = 0.0;
            inf_stats(tot_inf[i] - inf.sum[g * inf.n_x + i0 + i], tot_inf_sq[i] - inf.sumsq[g * inf.n_x + i0 + i], m,
                      inf.shift[i0 + i], scratch[i], raw, scratch2[i]);
        }
        r.binf_jk.push_back(mean_of(scratch));
        r.vdirect_jk.push_back(mean_of(scratch2));
    }
    return r;
}

// Estimate of scale * mean_x(w_b1 b1 + w_binf binf + w_vd vdirect).
Estimate combine(const RegionData& r, double w_b1, double w_binf, double w_vd) {
    const std::size_t n = r.b1.size();
    std::vector<double> per_x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = 0.0;
        if (w_b1 != 0.0) v += w_b1 * r.b1[i];
        if (w_binf != 0.0) v += w_binf * r.binf[i];
        if (w_vd != 0.0) v += w_vd * r.vdirect[i];
        per_x[i] = v;
    }
    const double se_x = batch_se(per_x, r.batches);
    double var_u = 0.0;
    if (w_b1 != 0.0) {
        std::vector<double> jk(r.b1_jk.size());
        for (std::size_t g = 0; g < jk.size(); ++g) jk[g] = w_b1 * r.b1_jk[g];
        var_u += jackknife_var(jk);
    }
    if (w_binf != 0.0 || w_vd != 0.0) {
        std::vector<double> jk(r.binf_jk.size());
        for (std::size_t g = 0; g < jk.size(); ++g) {
            jk[g] = (w_binf != 0.0 ? w_binf * r.binf_jk[g] : 0.0) + (w_vd != 0.0 ? w_vd * r.vdirect_jk[g] : 0.0);
        }
        var_u += jackknife_var(jk);
    }
    return {r.scale * mean_of(per_x), r.scale * std::sqrt(se_x * se_x + var_u)};
}

// Direct simulation of q-tree forests: per forest and per x, (s_bar_q(x) - s(x))^2.
struct DirectQ {
    std::vector<double> per_forest_x;  // forests x n_x
    std::size_t forests = 0;
};

DirectQ simulate_forests(const PartitionSource& source, std::size_t q, std::size_t q_index, std::size_t forests,
                         const RegressionFn& f, std::span<const double> xs, std::span<const double> sx) {
    const std::size_t d = f.dim();
    const std::size_t n_x = sx.size();
    DirectQ out;
    out.forests = forests;
    out.per_forest_x.assign(forests * n_x, 0.0);
    parallel_for(forests, [&](std::size_t r) {
        Partition part(d);
        Projector proj;
        std::vector<double> values(n_x), mean(n_x, 0.0);
        for (std::size_t j = 0; j < q; ++j) {
            const std::uint64_t index = (static_cast<std::uint64_t>(q_index) << 40) + r * q + j;
            source.draw(StreamKind::ForestCurve, index, part);
            proj.run(part, f, xs, d, values);
            for (std::size_t i = 0; i < n_x; ++i) mean[i] += values[i];
        }
        double* row = out.per_forest_x.data() + r * n_x;
        for (std::size_t i = 0; i < n_x; ++i) {
            const double e = mean[i] / static_cast<double>(q) - sx[i];
            row[i] = e * e;
        }
    });
    return out;
}

Estimate direct_estimate(const DirectQ& dq, std::size_t n_x, std::size_t i0, std::size_t i1, double scale,
                         std::size_t batches) {
    const std::size_t n = i1 - i0;
    std::vector<double> per_x(n, 0.0), per_forest(dq.forests, 0.0);
    for (std::size_t r = 0; r < dq.forests; ++r) {
        const double* row = dq.per_forest_x.data() + r * n_x + i0;
        for (std::size_t i = 0; i < n; ++i) per_x[i] += row[i];
        per_forest[r] = pairwise_sum(row, n) / static_cast<double>(n);
    }
    for (double& v : per_x) v /= static_cast<double>(dq.forests);
    const double se_x = batch_se(per_x, batches);
    const double se_u = sample_mean(per_forest).se;
    return {scale * mean_of(per_x), scale * std::sqrt(se_x * se_x + se_u * se_u)};
}

BiasTerms assemble(const RegionData& r, std::span<const double> q_list) {
    BiasTerms t;
    t.b1 = combine(r, 1.0, 0.0, 0.0);
    t.binf = combine(r, 0.0, 1.0, 0.0);
    t.binf_raw = r.scale * mean_of(r.binf_raw);
    t.vtree = combine(r, 1.0, -1.0, 0.0);
    t.vtree_direct = combine(r, 0.0, 0.0, 1.0);
    t.identity_residual = combine(r, 1.0, -1.0, -1.0);
    for (double q : q_list) {
        const double inv = 1.0 / q;
        ForestBias fb;
        fb.q = q;
        fb.formula = q == 1.0 ? t.b1 : combine(r, inv, 1.0 - inv, 0.0);
        t.bq.push_back(fb);
    }
    return t;
}

void check_finite(const BiasTerms& t, const BiasReport& report) {
    auto ok = [](const Estimate& e) { return std::isfinite(e.value) && std::isfinite(e.se); };
    bool good = ok(t.b1) && ok(t.binf) && ok(t.vtree) && ok(t.vtree_direct);
    for (const auto& b : t.bq) good = good && ok(b.formula);
    if (!good) {
        std::ostringstream os;
        os << "model=" << model_name(report.model.kind) << " k=" << report.model.k << " fn=" << report.function
           << " B1=" << t.b1.value << " Binf=" << t.binf.value << " Vtree=" << t.vtree.value;
        throw NumericError("non-finite bias estimate", os.str());
    }
}

}  // namespace

std::size_t default_n_u_inf(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::Bprf:
        case ModelKind::Midpoint: {
            const double alpha = bprf_alpha(spec.dim);
            return std::size_t{1} << static_cast<std::size_t>(std::ceil(2.0 * alpha * static_cast<double>(spec.k)));
        }
        default:
            return spec.k * spec.k;
    }
}

PartitionSource::PartitionSource(const ModelSpec& spec, const RegressionFn& f, const SeedSpec& seeds)
    : spec_(spec), seeds_(seeds) {
    spec_.validate();
    if (f.dim() != spec_.dim) throw ParameterError("model and function dimensions differ");
    if (spec_.kind == ModelKind::Holdout) {
        Engine rng = seeds_.stream(StreamKind::HoldoutData, 0);
        holdout_ = generate_dataset(f, spec_.effective_n_prime(), spec_.sigma, rng);
    }
}

void PartitionSource::draw(StreamKind kind, std::uint64_t index, Partition& out) const {
    Engine rng = seeds_.stream(kind, index);
    sample_partition(spec_, rng, out, holdout_ ? &*holdout_ : nullptr);
}

Partition PartitionSource::draw(StreamKind kind, std::uint64_t index) const {
    Partition p(spec_.dim);
    draw(kind, index, p);
    return p;
}

BiasReport estimate_bias(const ModelSpec& spec, const RegressionFn& f, const BorderPolicy& policy,
                         std::span<const double> q_list, const BiasBudget& budget, std::uint64_t seed) {
    if (budget.n_x < 2 || budget.n_u_tree < 1 || budget.groups < 1) {
        throw ParameterError("bias budget: need n_x >= 2, n_u_tree >= 1 and at least one group");
    }
    if (budget.stratified_x && f.dim() != 1) throw ParameterError("stratified x points need d = 1");
    for (double q : q_list) {
        if (!(q >= 1.0)) throw ParameterError("forest sizes q must be at least 1");
    }
    const SeedSpec seeds(seed);
    const PartitionSource source(spec, f, seeds);
    const std::size_t d = f.dim();

    BiasReport report;
    report.model = spec;
    report.function = std::string(f.name());
    report.k = spec.k;
    report.seed = seed;
    report.n_x = budget.n_x;
    report.n_u_tree = budget.n_u_tree;
    report.n_u_inf = std::max(kMinInfPartitions, budget.n_u_inf ? budget.n_u_inf : default_n_u_inf(spec));
    report.groups = budget.groups;
    report.stratified_x = budget.stratified_x;

    // Full-cube points first, then the borderless points.
    std::vector<double> xs = draw_points(seeds.stream(StreamKind::XPoints, 0), budget.n_x, d, 0.0, 1.0,
                                         budget.stratified_x);
    const bool borderless = policy.borderless();
    double eps = 0.0;
    if (borderless) {
        if (spec.kind != ModelKind::Toy && spec.kind != ModelKind::Purf &&
            policy.source != BorderPolicy::Source::Custom) {
            throw ParameterError("only toy and purf have a built-in border width; use a custom epsilon");
        }
        eps = policy.epsilon(spec.kind == ModelKind::Holdout ? spec.leaf_count() : spec.k);
        const auto inner = draw_points(seeds.stream(StreamKind::XPoints, 1), budget.n_x, d, eps, 1.0 - eps,
                                       budget.stratified_x);
        xs.insert(xs.end(), inner.begin(), inner.end());
    }
    const std::size_t n_total = xs.size() / d;
    std::vector<double> sx(n_total);
    for (std::size_t i = 0; i < n_total; ++i) sx[i] = f.eval(std::span<const double>(xs).subspan(i * d, d));

    const auto tree = run_pass(source, StreamKind::TreePartition, budget.n_u_tree, budget.groups, f, xs, sx, false);
    const auto inf = run_pass(source, StreamKind::ForestPartition, report.n_u_inf, budget.groups, f, xs, sx, true);

    const auto full_region = region_data(tree, inf, 0, budget.n_x, 1.0, budget.groups);
    report.full = assemble(full_region, q_list);
    std::optional<RegionData> inner_region;
    if (borderless) {
        report.epsilon = eps;
        inner_region = region_data(tree, inf, budget.n_x, n_total, std::pow(1.0 - 2.0 * eps, static_cast<double>(d)),
                                   budget.groups);
        report.borderless = assemble(*inner_region, q_list);
    }

    if (budget.direct_q) {
        for (std::size_t qi = 0; qi < q_list.size(); ++qi) {
            const double q = q_list[qi];
            if (!std::isfinite(q)) continue;
            const auto qn = static_cast<std::size_t>(std::llround(q));
            const std::size_t forests = std::max<std::size_t>(budget.groups, (budget.n_u_tree + qn - 1) / qn);
            const auto dq = simulate_forests(source, qn, qi + 1, forests, f, xs, sx);
            report.full.bq[qi].direct = direct_estimate(dq, n_total, 0, budget.n_x, 1.0, budget.groups);
            if (borderless) {
                report.borderless->bq[qi].direct =
                    direct_estimate(dq, n_total, budget.n_x, n_total, inner_region->scale, budget.groups);
            }
        }
    }
    check_finite(report.full, report);
    if (report.borderless) check_finite(*report.borderless, report);
    return report;
}

EstimationErrorReport estimate_estimation_error(const ModelSpec& spec, const RegressionFn& f, std::size_t n,
                                                double sigma, std::size_t q, const EstimationErrorBudget& budget,
                                                std::uint64_t seed) {
    if (n < 1) throw ParameterError("estimation error: n must be at least 1");
    if (q < 1) throw ParameterError("estimation error: q must be at least 1");
    if (!(sigma >= 0.0)) throw ParameterError("estimation error: sigma must be non-negative");
    if (budget.n_rep < 2) throw ParameterError("estimation error: need at least two replicates");
    const SeedSpec seeds(seed);
    const PartitionSource source(spec, f, seeds);
    const std::size_t d = f.dim();
    EstimationErrorReport out;
    out.q = q;
    out.per_replicate.assign(budget.n_rep, 0.0);

    parallel_for(budget.n_rep, [&](std::size_t r) {
        Engine data_rng = seeds.stream(StreamKind::Dataset, r);
        const Dataset data = generate_dataset(f, n, sigma, data_rng);
        std::vector<TreeEstimator> trees;
        for (std::size_t j = 0; j < q; ++j) trees.push_back(fit_tree(source.draw(StreamKind::TreePartition, r * q + j), data));
        if (q == 1) {
            // Exact integral over x: sum over cells of |cell| (beta - fitted value)^2.
            const auto& t = trees.front();
            const auto& part = t.partition();
            double err = 0.0;
            for (std::size_t c = 0; c < part.size(); ++c) {
                const double diff = f.cell_average(part.cell(c)) - t.leaf_values()[c];
                err += part.cell(c).volume() * diff * diff;
            }
            out.per_replicate[r] = err;
            return;
        }
        const auto xs = draw_points(seeds.stream(StreamKind::XPoints, r), budget.n_x, d, 0.0, 1.0, false);
        std::vector<Projector> projs(q);
        std::vector<double> proj_sum(budget.n_x, 0.0), fit_sum(budget.n_x, 0.0), values(budget.n_x);
        for (std::size_t j = 0; j < q; ++j) {
            projs[j].run(trees[j].partition(), f, xs, d, values);
            for (std::size_t i = 0; i < budget.n_x; ++i) {
                proj_sum[i] += values[i];
                fit_sum[i] += trees[j].predict(std::span<const double>(xs).subspan(i * d, d));
            }
        }
        double err = 0.0;
        for (std::size_t i = 0; i < budget.n_x; ++i) {
            const double diff = (proj_sum[i] - fit_sum[i]) / static_cast<double>(q);
            err += diff * diff;
        }
        out.per_replicate[r] = err / static_cast<double>(budget.n_x);
    });
    out.mc = sample_mean(out.per_replicate);

    std::vector<double> exp_sums(budget.n_u_geom), diam_sums(budget.n_u_geom), sizes(budget.n_u_geom);
    parallel_for(budget.n_u_geom, [&](std::size_t u) {
        const Partition part = source.draw(StreamKind::Generic, u);
        double es = 0.0, ds = 0.0;
        for (std::size_t c = 0; c < part.size(); ++c) {
            const auto cell = part.cell(c);
            es += std::exp(-static_cast<double>(n) * cell.volume());
            for (std::size_t j = 0; j < d; ++j) ds += (cell.upper[j] - cell.lower[j]) * (cell.upper[j] - cell.lower[j]);
        }
        exp_sums[u] = es;
        diam_sums[u] = ds;
        sizes[u] = static_cast<double>(part.size());
    });
    out.exp_sum = sample_mean(exp_sums);
    out.diam2_sum = sample_mean(diam_sums);
    out.cells = mean_of(sizes);

    const double nd = static_cast<double>(n);
    const auto& sm = f.smoothness();
    out.upper = out.cells / nd * (2.0 * sigma * sigma + 9.0 * sm.sup_norm * sm.sup_norm);
    out.lower = sigma * sigma / nd * (out.cells - 2.0 * out.exp_sum.value);
    if (out.lower <= 0.0) {
        out.lower_degenerate = true;
        out.lower = 0.0;
    }
    out.lipschitz_upper = 2.0 / nd * (sigma * sigma * out.cells + sm.sup_grad * sm.sup_grad * out.diam2_sum.value) +
                          sm.sup_norm * sm.sup_norm / nd * out.exp_sum.value;
    return out;
}

RiskReport estimate_risk(const ModelSpec& spec, const RegressionFn& f, std::size_t n, double sigma, std::size_t q,
                         const RiskBudget& budget, std::uint64_t seed) {
    if (n < 1 || q < 1 || budget.n_rep < 2 || budget.n_x < 1) {
        throw ParameterError("risk: need n >= 1, q >= 1, n_rep >= 2 and n_x >= 1");
    }
    if (!(sigma >= 0.0)) throw ParameterError("risk: sigma must be non-negative");
    const SeedSpec seeds(seed);
    const PartitionSource source(spec, f, seeds);
    const std::size_t d = f.dim();
    std::vector<double> risk(budget.n_rep), bias(budget.n_rep), var(budget.n_rep), resid(budget.n_rep);

    parallel_for(budget.n_rep, [&](std::size_t r) {
        Engine data_rng = seeds.stream(StreamKind::Dataset, r);
        const Dataset data = generate_dataset(f, n, sigma, data_rng);
        const auto xs = draw_points(seeds.stream(StreamKind::XPoints, r), budget.n_x, d, 0.0, 1.0, false);
        std::vector<double> proj_sum(budget.n_x, 0.0), fit_sum(budget.n_x, 0.0), values(budget.n_x);
        Projector proj;
        for (std::size_t j = 0; j < q; ++j) {
            const TreeEstimator tree = fit_tree(source.draw(StreamKind::TreePartition, r * q + j), data);
            proj.run(tree.partition(), f, xs, d, values);
            for (std::size_t i = 0; i < budget.n_x; ++i) {
                proj_sum[i] += values[i];
                fit_sum[i] += tree.predict(std::span<const double>(xs).subspan(i * d, d));
            }
        }
        double rk = 0.0, bs = 0.0, vr = 0.0;
        for (std::size_t i = 0; i < budget.n_x; ++i) {
            const double s = f.eval(std::span<const double>(xs).subspan(i * d, d));
            const double st = proj_sum[i] / static_cast<double>(q);
            const double sh = fit_sum[i] / static_cast<double>(q);
            rk += (s - sh) * (s - sh);
            bs += (s - st) * (s - st);
            vr += (st - sh) * (st - sh);
        }
        const double nx = static_cast<double>(budget.n_x);
        risk[r] = rk / nx;
        bias[r] = bs / nx;
        var[r] = vr / nx;
        resid[r] = risk[r] - bias[r] - var[r];
    });
    RiskReport out;
    out.risk = sample_mean(risk);
    out.bias_part = sample_mean(bias);
    out.variance_part = sample_mean(var);
    out.residual = sample_mean(resid);
    out.per_replicate_risk = std::move(risk);
    return out;
}

ForestCurve forest_size_curve(const ModelSpec& spec, const RegressionFn& f, std::span<const double> q_grid,
                              const BiasBudget& budget, std::uint64_t seed) {
    if (q_grid.empty()) throw ParameterError("forest curve: empty q grid");
    if (!std::is_sorted(q_grid.begin(), q_grid.end())) throw ParameterError("forest curve: q grid must be sorted");
    BiasBudget b = budget;
    b.direct_q = true;
    ForestCurve curve;
    curve.bias = estimate_bias(spec, f, BorderPolicy::full(), q_grid, b, seed);
    const auto& terms = curve.bias.full;
    for (const auto& fb : terms.bq) {
        curve.rows.push_back({fb.q, fb.formula, fb.direct});
        if (!curve.q_star && fb.formula.value <= 2.0 * terms.binf.value) curve.q_star = fb.q;
    }
    // Least-squares slope of direct Bq against 1/q.
    std::vector<double> u, y, se;
    for (const auto& row : curve.rows) {
        if (!row.direct) continue;
        u.push_back(1.0 / row.q);
        y.push_back(row.direct->value);
        se.push_back(row.direct->se);
    }
    if (u.size() >= 2) {
        const double ub = mean_of(u), yb = mean_of(y);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            sxx += (u[i] - ub) * (u[i] - ub);
            sxy += (u[i] - ub) * (y[i] - yb);
        }
        double var = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double w = (u[i] - ub) / sxx;
            var += w * w * se[i] * se[i];
        }
        curve.slope_direct = {sxy / sxx, std::sqrt(var)};
    }
    return curve;
}

KSelection select_k(double a, double b, double alpha, double n) {
    if (!(a > 0.0 && b > 0.0 && alpha > 0.0 && n > 0.0)) throw ParameterError("select_k: a, b, alpha, n must be > 0");
    auto objective = [&](double x) { return a * std::pow(x, -alpha) + b * x / n; };
    KSelection s;
    s.x_star = std::pow(a * alpha * n / b, 1.0 / (alpha + 1.0));
    const double rounded = std::clamp(std::round(s.x_star), 1.0, std::max(1.0, std::floor(n)));
    s.k_star = static_cast<std::size_t>(rounded);
    s.f_x_star = objective(s.x_star);
    s.f_k_star = objective(rounded);
    return s;
}

std::vector<MomentSample> sample_moments(const ModelSpec& spec, std::span<const double> x, std::size_t reps,
                                         std::uint64_t seed) {
    spec.validate();
    const std::size_t d = spec.dim;
    if (x.size() != d) throw DomainError("sample_moments: point dimension does not match the model");
    if (reps < 2) throw ParameterError("sample_moments: need at least two draws");
    // Hold-out partitions need a response; use the Sum target for the hold-out sample.
    const RegressionFn target(FunctionKind::Sum, d);
    const SeedSpec seeds(seed);
    const PartitionSource source(spec, target, seeds);

    std::vector<std::string> names;
    auto suffix = [d](std::size_t i) { return d == 1 ? std::string() : "[" + std::to_string(i) + "]"; };
    for (std::size_t i = 0; i < d; ++i) {
        for (const char* base : {"E[a]", "E[b]", "E[a^2]", "E[b^2]", "E[a^3]", "E[b^3]", "E[a^4]", "E[b^4]", "E[a-b]",
                                 "E[ab]", "E[a^2+b^2]", "E[a^3+b^3]", "E[a^4+b^4]"}) {
            names.push_back(base + suffix(i));
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            names.push_back("E[(a-b)(a-b)][" + std::to_string(i) + "," + std::to_string(j) + "]");
        }
    }
    const std::size_t m = names.size();
    const std::size_t chunks = std::min<std::size_t>(64, reps);
    std::vector<double> sums(chunks * m, 0.0), sumsq(chunks * m, 0.0);
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t lo = c * reps / chunks, hi = (c + 1) * reps / chunks;
        Partition part(d);
        std::vector<double> v(m);
        for (std::size_t r = lo; r < hi; ++r) {
            source.draw(StreamKind::Moments, r, part);
            const auto fd = part.cell_bounds_at(x);
            std::size_t pos = 0;
            for (std::size_t i = 0; i < d; ++i) {
                const double a = fd.alpha[i], b = fd.beta[i];
                const double a2 = a * a, b2 = b * b;
                for (double val : {a, b, a2, b2, a2 * a, b2 * b, a2 * a2, b2 * b2, a - b, a * b, a2 + b2,
                                   a2 * a + b2 * b, a2 * a2 + b2 * b2}) {
                    v[pos++] = val;
                }
            }
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = i + 1; j < d; ++j) v[pos++] = (fd.alpha[i] - fd.beta[i]) * (fd.alpha[j] - fd.beta[j]);
            }
            for (std::size_t t = 0; t < m; ++t) {
                sums[c * m + t] += v[t];
                sumsq[c * m + t] += v[t] * v[t];
            }
        }
    });
    std::vector<MomentSample> out;
    const double n = static_cast<double>(reps);
    for (std::size_t t = 0; t < m; ++t) {
        double s = 0.0, ss = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            s += sums[c * m + t];
            ss += sumsq[c * m + t];
        }
        const double mean = s / n;
        const double var = std::max(0.0, (ss - n * mean * mean) / (n - 1.0));
        out.push_back({names[t], mean, std::sqrt(var / n)});
    }
    return out;
}

}  // namespace prf
