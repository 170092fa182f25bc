#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prf/border.hpp"
#include "prf/dataset.hpp"
#include "prf/functions.hpp"
#include "prf/models.hpp"
#include "prf/rng.hpp"

namespace prf {

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

struct BiasBudget {
    std::size_t n_x = 1000;
    std::size_t n_u_tree = 500;
    std::size_t n_u_inf = 0;  // 0 picks the model default
    std::size_t groups = 20;  // partition groups for the jackknife, x-batches for the x error
    bool stratified_x = false;  // jittered grid instead of i.i.d. x (d = 1 only)
    bool direct_q = false;      // also simulate finite forests for each q
};

// n_u_inf default: k^2 for toy, purf, ubprf and holdout (k as in ModelSpec);
// 2^ceil(2 alpha p) for bprf and midpoint.
std::size_t default_n_u_inf(const ModelSpec& spec);

struct ForestBias {
    double q = 1.0;  // +infinity for the infinite forest
    Estimate formula;
    std::optional<Estimate> direct;
};

// Bias terms over one x-region.
struct BiasTerms {
    Estimate b1;            // single-tree bias
    Estimate binf;          // infinite-forest bias, corrected for finite n_u_inf
    double binf_raw = 0.0;  // the same without the correction
    Estimate vtree;         // b1 - binf
    Estimate vtree_direct;  // average within-x variance of the projection
    Estimate identity_residual;  // b1 - binf - vtree_direct
    std::vector<ForestBias> bq;
};

struct BiasReport {
    ModelSpec model;
    std::string function;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::size_t n_x = 0, n_u_tree = 0, n_u_inf = 0, groups = 0;
    bool stratified_x = false;
    BiasTerms full;
    std::optional<BiasTerms> borderless;  // integral over [eps, 1-eps]^d
    double epsilon = 0.0;
};

// Draws partitions of one model law, holding the hold-out sample if needed.
class PartitionSource {
public:
    PartitionSource(const ModelSpec& spec, const RegressionFn& f, const SeedSpec& seeds);

    void draw(StreamKind kind, std::uint64_t index, Partition& out) const;
    Partition draw(StreamKind kind, std::uint64_t index) const;
    const ModelSpec& spec() const { return spec_; }
    const std::optional<Dataset>& holdout_data() const { return holdout_; }

private:
    ModelSpec spec_;
    SeedSpec seeds_;
    std::optional<Dataset> holdout_;
};

BiasReport estimate_bias(const ModelSpec& spec, const RegressionFn& f, const BorderPolicy& policy,
                         std::span<const double> q_list, const BiasBudget& budget, std::uint64_t seed);

struct EstimationErrorBudget {
    std::size_t n_rep = 200;
    std::size_t n_x = 2000;      // x-points per replicate when q > 1
    std::size_t n_u_geom = 2000;  // partitions for the expectations inside the bounds
};

struct EstimationErrorReport {
    Estimate mc;
    std::vector<double> per_replicate;
    double lower = 0.0;
    bool lower_degenerate = false;  // lower bound <= 0, reported as the trivial bound 0
    double upper = 0.0;
    std::optional<double> lipschitz_upper;
    double cells = 0.0;  // number of leaves per partition (mean if random)
    Estimate exp_sum;     // E[sum_lambda exp(-n |lambda|)]
    Estimate diam2_sum;   // E[sum_lambda diam(lambda)^2]
    std::size_t q = 1;
};

// Estimation error E[(s_tilde_V(X) - s_hat(X; V))^2] of a q-tree forest fitted on n points.
EstimationErrorReport estimate_estimation_error(const ModelSpec& spec, const RegressionFn& f, std::size_t n,
                                                double sigma, std::size_t q, const EstimationErrorBudget& budget,
                                                std::uint64_t seed);

struct RiskBudget {
    std::size_t n_rep = 50;
    std::size_t n_x = 2000;
};

struct RiskReport {
    Estimate risk;
    Estimate bias_part;
    Estimate variance_part;
    Estimate residual;  // risk - bias_part - variance_part, paired per replicate
    std::vector<double> per_replicate_risk;
};

RiskReport estimate_risk(const ModelSpec& spec, const RegressionFn& f, std::size_t n, double sigma, std::size_t q,
                         const RiskBudget& budget, std::uint64_t seed);

struct ForestCurveRow {
    double q;
    Estimate formula;
    std::optional<Estimate> direct;
};

struct ForestCurve {
    BiasReport bias;
    std::vector<ForestCurveRow> rows;
    std::optional<double> q_star;  // smallest q with Bq <= 2 Binf
    Estimate slope_direct;         // least-squares slope of direct Bq against 1/q
};

ForestCurve forest_size_curve(const ModelSpec& spec, const RegressionFn& f, std::span<const double> q_grid,
                              const BiasBudget& budget, std::uint64_t seed);

struct KSelection {
    double x_star;
    std::size_t k_star;
    double f_x_star;
    double f_k_star;
};

// Minimiser of a x^{-alpha} + b x / n over x > 0, rounded to an integer in [1, n].
KSelection select_k(double a, double b, double alpha, double n);

// Moments of (alpha, beta) at x estimated from `reps` sampled partitions,
// named as in moment_table.
struct MomentSample {
    std::string name;
    double mean;
    double se;
};
std::vector<MomentSample> sample_moments(const ModelSpec& spec, std::span<const double> x, std::size_t reps,
                                         std::uint64_t seed);

}  // namespace prf
