#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prf/border.hpp"
#include "prf/functions.hpp"
#include "prf/models.hpp"

namespace prf {

// Moments of alpha = x_i - A_i and beta = B_i - x_i for one coordinate.
// Individual moments are only available for the one-dimensional models.
struct CoordinateMoments {
    std::optional<double> a, b, aa, bb, aaa, bbb, aaaa, bbbb;
    double diff = 0.0;  // E[alpha - beta]
    double ab = 0.0;    // E[alpha beta]
    double sum2 = 0.0;  // E[alpha^2 + beta^2]
    double sum3 = 0.0;  // E[alpha^3 + beta^3], or an upper bound if sum3_is_bound
    double sum4 = 0.0;  // E[alpha^4 + beta^4]
    bool sum3_is_bound = false;
};

struct MomentSet {
    ModelKind model = ModelKind::Toy;
    std::size_t param = 0;  // k, or the depth p for bprf
    std::vector<double> x;
    std::vector<CoordinateMoments> coords;
    // cross[i*d + j] = E[(alpha_i - beta_i)(alpha_j - beta_j)]; diagonal = sum2 - 2 ab.
    std::vector<double> cross;

    std::size_t dim() const { return coords.size(); }
    double cross_at(std::size_t i, std::size_t j) const { return cross[i * dim() + j]; }
};

// One named scalar from a MomentSet, for side-by-side comparison with Monte Carlo.
struct NamedMoment {
    std::string name;
    double value;
    bool is_upper_bound = false;
};
std::vector<NamedMoment> moment_table(const MomentSet& m);

MomentSet toy_moments(std::size_t k, double x);

// Remainder terms of the PURF formulas, written with P_j(x) = x^j + (1-x)^j:
//   E[alpha - beta] = r_diff / (k+1)
//   E[alpha beta]   = (1 + r_prod) / ((k+1)(k+2))
//   E[alpha^j + beta^j] = (2 j! + r_j) / prod_{i<=j}(k+i), j = 2, 3, 4.
struct PurfRemainders {
    double r_diff, r_prod, r2, r3, r4;
};
PurfRemainders purf_remainders(std::size_t k, double x);

// Bounds on the remainders over x in [4 log k / k, 1 - 4 log k / k], valid for k >= 27.
struct PurfInteriorBounds {
    double r_diff, r_prod, r2, r3, r4;
};
PurfInteriorBounds purf_interior_bounds(std::size_t k);

MomentSet purf_moments(std::size_t k, double x);

MomentSet bprf_moments(std::size_t p, std::size_t d, std::span<const double> x);

// Dispatch for the models with closed forms (toy, purf, bprf).
MomentSet closed_form_moments(const ModelSpec& spec, std::span<const double> x);

// Solution of u_{n+1} = rate * u_n + sum_i coef_i * base_i^n with u_0 given.
// Requires every base_i != rate.
struct GeometricForcing {
    double coef;
    double base;
};
double solve_geometric_recursion(double u0, double rate, std::span<const GeometricForcing> forcing,
                                 std::size_t n);

// E[(alpha beta)^delta] for BPRF.
double bprf_product_moment(std::size_t p, std::size_t d, double x, double delta);

struct Interval {
    double lower;
    double upper;
    bool contains(double v) const { return v >= lower && v <= upper; }
};

// Local bias and variance quantities at a point (pointwise Taylor expansion
// of the projection around x).
struct PointwiseExpansion {
    double m1 = 0.0;  // first-order mean of the projection error
    double m2 = 0.0;  // second-order mean
    double n2 = 0.0;  // second moment of the first-order term
    double r2 = 0.0;
    std::optional<double> r3;  // needs C3
    double r4 = 0.0;

    double variance_center() const { return n2 - m1 * m1; }
    Interval binf_band_c2() const;
    Interval vtree_band_c2() const;
    std::optional<Interval> binf_band_c3() const;
};

PointwiseExpansion pointwise_expansion(const MomentSet& moments, const RegressionFn& f);
PointwiseExpansion pointwise_expansion(const ModelSpec& spec, const RegressionFn& f, std::span<const double> x);

// Leading-order integrated predictions with their remainder half-widths.
struct TheoreticalBias {
    double binf = 0.0;
    std::optional<double> binf_band;
    double vtree = 0.0;
    std::optional<double> vtree_band;
    double epsilon = 0.0;
    // Upper bound on the integrated infinite-forest bias from the C2-level result.
    std::optional<double> binf_upper;
};

TheoreticalBias theoretical_bias(const ModelSpec& spec, const RegressionFn& f, const BorderPolicy& policy);

struct RateExponents {
    double tree = 0.0;
    double forest = 0.0;
    std::optional<double> forest_borderless;
    std::optional<double> beta_urt;
};

// Exponent alpha such that the BPRF bias decays like k^{-alpha}.
double bprf_alpha(std::size_t d);
RateExponents rate_exponents(ModelKind model, std::size_t d);

struct BprfGeometry {
    double expected_diam2_sum;
    double kappa;
};
BprfGeometry bprf_geometry(std::size_t p, std::size_t d);
// 2^p [1/u + (1 - 1/u) exp(-n e^{-(p + sqrt(u p))})]
double bprf_volume_sum_bound(std::size_t p, double n, double u);

// Hat kernel k (1 - k |u|) on |u| <= 1/k.
double toy_kernel(std::size_t k, double u);
// integral_0^1 s(t) h(t - x) dt for interior x in [1/k, 1 - 1/k].
double kernel_bias_integral(const RegressionFn& f, std::size_t k, double x);

}  // namespace prf
