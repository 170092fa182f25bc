#include "prf/oracles.hpp"

#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "prf/errors.hpp"

namespace prf {

namespace {

using std::numbers::pi;
using GaussKronrod = boost::math::quadrature::gauss_kronrod<double, 61>;

double ipow(double base, long e) {
    if (e < 0) return 1.0 / ipow(base, -e);
    double r = 1.0;
    while (e > 0) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

void check_unit(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("moment point must lie in [0, 1]");
}

double integrate_1d(const std::function<double(double)>& g, double a, double b) {
    if (b <= a) return 0.0;
    return GaussKronrod::integrate(g, a, b, 15, 1e-13);
}

MomentSet one_dim_set(ModelKind model, std::size_t param, double x, CoordinateMoments c) {
    MomentSet m;
    m.model = model;
    m.param = param;
    m.x = {x};
    m.cross = {c.sum2 - 2.0 * c.ab};
    m.coords.push_back(c);
    return m;
}

void fill_sums_from_individuals(CoordinateMoments& c) {
    c.diff = *c.a - *c.b;
    c.sum2 = *c.aa + *c.bb;
    c.sum3 = *c.aaa + *c.bbb;
    c.sum4 = *c.aaaa + *c.bbbb;
}

// Moments of the toy law for x <= 1/k (left border). alpha = x V with
// probability g = kx, else alpha = x and beta = (1/k - x) V.
CoordinateMoments toy_left_border(std::size_t k, double x) {
    const double c = 1.0 / static_cast<double>(k);
    const double g = static_cast<double>(k) * x;
    std::array<double, 5> ea{}, eb{};
    for (int j = 1; j <= 4; ++j) {
        ea[j] = g * ipow(x, j) / (j + 1) + (1.0 - g) * ipow(x, j);
        const double tilted = x > 0.0 ? (ipow(c, j + 1) - ipow(c - x, j + 1)) / ((j + 1) * x) : 0.0;
        eb[j] = g * tilted + (1.0 - g) * ipow(c - x, j) / (j + 1);
    }
    CoordinateMoments m;
    m.a = ea[1], m.aa = ea[2], m.aaa = ea[3], m.aaaa = ea[4];
    m.b = eb[1], m.bb = eb[2], m.bbb = eb[3], m.bbbb = eb[4];
    m.ab = g * (x * c / 2.0 - x * x / 3.0) + (1.0 - g) * x * (c - x) / 2.0;
    return m;
}

void swap_sides(CoordinateMoments& m) {
    std::swap(m.a, m.b);
    std::swap(m.aa, m.bb);
    std::swap(m.aaa, m.bbb);
    std::swap(m.aaaa, m.bbbb);
}

// integral_0^x t^m (1-t)^n dt by repeated integration by parts.
double incomplete_beta(int m, std::size_t n, double x) {
    const double np1 = static_cast<double>(n + 1);
    if (m == 0) return (1.0 - ipow(1.0 - x, static_cast<long>(n + 1))) / np1;
    return -ipow(x, m) * ipow(1.0 - x, static_cast<long>(n + 1)) / np1 + m / np1 * incomplete_beta(m - 1, n + 1, x);
}

// u^m P_j with u = x(1-x), P_j = x^j + (1-x)^j; valid for m + j >= 0.
double u_times_p(int m, long j, double x) {
    return ipow(x, m + j) * ipow(1.0 - x, m) + ipow(x, m) * ipow(1.0 - x, m + j);
}

double rising(std::size_t k, int n) {
    double r = 1.0;
    for (int i = 1; i <= n; ++i) r *= static_cast<double>(k) + i;
    return r;
}

double first_derivative(const RegressionFn& f, double t) { return f.gradient(std::span<const double>(&t, 1))[0]; }

const Smoothness& require_c2(const RegressionFn& f) {
    const auto& sm = f.smoothness();
    if (!sm.c2) throw UnsupportedError(std::string(f.name()) + ": bounds unavailable (no second-order constant)");
    return sm;
}

// Cube integrals needed by the BPRF predictions:
//   drift       = int (grad s . (1 - 2x))^2
//   drift_curv  = int (grad s . (1 - 2x) + sum_i d_ii s x_i (1 - x_i))^2
//   spread      = sum_i int (d_i s)^2 x_i (1 - x_i)
struct CubeIntegrals {
    double drift, drift_curv, spread;
};

CubeIntegrals bprf_cube_integrals(const RegressionFn& f) {
    const std::size_t d = f.dim();
    if (f.kind() == FunctionKind::Sum) {
        const double dd = static_cast<double>(d);
        return {dd / 3.0, dd / 3.0, dd / 6.0};
    }
    auto integrand = [&](std::span<const double> x, CubeIntegrals& acc, double w) {
        const auto g = f.gradient(x);
        const auto h = f.hessian(x);
        double drift = 0.0, curv = 0.0, spread = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double u = x[i] * (1.0 - x[i]);
            drift += g[i] * (1.0 - 2.0 * x[i]);
            curv += h[i * d + i] * u;
            spread += g[i] * g[i] * u;
        }
        acc.drift += w * drift * drift;
        acc.drift_curv += w * (drift + curv) * (drift + curv);
        acc.spread += w * spread;
    };
    CubeIntegrals acc{0.0, 0.0, 0.0};
    if (d == 1) {
        for (double CubeIntegrals::*field : {&CubeIntegrals::drift, &CubeIntegrals::drift_curv, &CubeIntegrals::spread}) {
            acc.*field = integrate_1d(
                [&](double t) -> double {
                    CubeIntegrals one{0.0, 0.0, 0.0};
                    integrand(std::span<const double>(&t, 1), one, 1.0);
                    return one.*field;
                },
                0.0, 1.0);
        }
        return acc;
    }
    if (f.kind() != FunctionKind::Friedman1) throw UnsupportedError("no cube quadrature for this function");
    // Friedman1 depends on the first five coordinates only.
    using Gauss10 = boost::math::quadrature::gauss<double, 10>;
    std::vector<double> nodes, weights;
    const auto& abscissa = Gauss10::abscissa();
    const auto& wts = Gauss10::weights();
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
        for (double sign : {-1.0, 1.0}) {
            if (abscissa[i] == 0.0 && sign > 0) continue;
            nodes.push_back(0.5 + 0.5 * sign * abscissa[i]);
            weights.push_back(0.5 * wts[i]);
        }
    }
    const std::size_t m = nodes.size();
    std::vector<double> x(d, 0.5);
    std::array<std::size_t, 5> idx{};
    for (;;) {
        double w = 1.0;
        for (std::size_t j = 0; j < 5; ++j) {
            x[j] = nodes[idx[j]];
            w *= weights[idx[j]];
        }
        integrand(x, acc, w);
        std::size_t j = 0;
        while (j < 5 && ++idx[j] == m) idx[j++] = 0;
        if (j == 5) break;
    }
    return acc;
}

}  // namespace

std::vector<NamedMoment> moment_table(const MomentSet& m) {
    std::vector<NamedMoment> out;
    const std::size_t d = m.dim();
    auto suffix = [d](std::size_t i) { return d == 1 ? std::string() : "[" + std::to_string(i) + "]"; };
    for (std::size_t i = 0; i < d; ++i) {
        const auto& c = m.coords[i];
        const auto s = suffix(i);
        if (c.a) {
            out.push_back({"E[a]" + s, *c.a});
            out.push_back({"E[b]" + s, *c.b});
            out.push_back({"E[a^2]" + s, *c.aa});
            out.push_back({"E[b^2]" + s, *c.bb});
            out.push_back({"E[a^3]" + s, *c.aaa});
            out.push_back({"E[b^3]" + s, *c.bbb});
            out.push_back({"E[a^4]" + s, *c.aaaa});
            out.push_back({"E[b^4]" + s, *c.bbbb});
        }
        out.push_back({"E[a-b]" + s, c.diff});
        out.push_back({"E[ab]" + s, c.ab});
        out.push_back({"E[a^2+b^2]" + s, c.sum2});
        out.push_back({"E[a^3+b^3]" + s, c.sum3, c.sum3_is_bound});
        out.push_back({"E[a^4+b^4]" + s, c.sum4});
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            out.push_back({"E[(a-b)(a-b)][" + std::to_string(i) + "," + std::to_string(j) + "]",
                           m.cross_at(i, j)});
        }
    }
    return out;
}

MomentSet toy_moments(std::size_t k, double x) {
    if (k < 2) throw ParameterError("toy moments need k >= 2");
    if (!(x >= 0.0 && x < 1.0)) throw DomainError("toy moments need x in [0, 1)");
    const double kd = static_cast<double>(k);
    const double c = 1.0 / kd;
    CoordinateMoments m;
    if (x < c) {
        m = toy_left_border(k, x);
    } else if (x > 1.0 - c) {
        m = toy_left_border(k, 1.0 - x);
        swap_sides(m);
    } else {
        m.a = m.b = c / 2.0;
        m.aa = m.bb = c * c / 3.0;
        m.aaa = m.bbb = c * c * c / 4.0;
        m.aaaa = m.bbbb = c * c * c * c / 5.0;
        m.ab = c * c / 6.0;
    }
    fill_sums_from_individuals(m);
    return one_dim_set(ModelKind::Toy, k, x, m);
}

PurfRemainders purf_remainders(std::size_t k, double x) {
    if (k < 1) throw ParameterError("purf moments need k >= 1");
    check_unit(x);
    const long n = static_cast<long>(k);
    const double kd = static_cast<double>(k);
    PurfRemainders r{};
    r.r_diff = ipow(x, n + 1) - ipow(1.0 - x, n + 1);
    r.r_prod = -u_times_p(0, n + 2, x);
    r.r2 = -2.0 * u_times_p(0, n + 2, x) - 2.0 * (kd + 2) * u_times_p(1, n, x);
    r.r3 = -6.0 * u_times_p(0, n + 3, x) - 6.0 * (kd + 3) * u_times_p(1, n + 1, x) -
           3.0 * (kd + 2) * (kd + 3) * u_times_p(2, n - 1, x);
    r.r4 = -24.0 * u_times_p(0, n + 4, x) - 24.0 * (kd + 4) * u_times_p(1, n + 2, x) -
           12.0 * (kd + 3) * (kd + 4) * u_times_p(2, n, x) -
           4.0 * (kd + 2) * (kd + 3) * (kd + 4) * u_times_p(3, n - 2, x);
    return r;
}

PurfInteriorBounds purf_interior_bounds(std::size_t k) {
    if (k < 27) throw ParameterError("purf interior bounds need k >= 27");
    const double kd = static_cast<double>(k);
    return {std::pow(kd, -4), 2.0 * std::pow(kd, -4), 11.0 / 9.0 * std::pow(kd, -3), std::pow(kd, -2),
            0.548 / kd};
}

MomentSet purf_moments(std::size_t k, double x) {
    const auto r = purf_remainders(k, x);
    CoordinateMoments m;
    m.diff = r.r_diff / rising(k, 1);
    m.ab = (1.0 + r.r_prod) / rising(k, 2);
    m.sum2 = (4.0 + r.r2) / rising(k, 2);
    m.sum3 = (12.0 + r.r3) / rising(k, 3);
    m.sum4 = (48.0 + r.r4) / rising(k, 4);
    // P(alpha >= t) = (1 - t)^k on [0, x], so E[alpha^j] = j int_0^x t^{j-1} (1-t)^k dt.
    auto power = [k](int j, double y) { return j * incomplete_beta(j - 1, k, y); };
    m.a = power(1, x), m.aa = power(2, x), m.aaa = power(3, x), m.aaaa = power(4, x);
    m.b = power(1, 1.0 - x), m.bb = power(2, 1.0 - x), m.bbb = power(3, 1.0 - x), m.bbbb = power(4, 1.0 - x);
    return one_dim_set(ModelKind::Purf, k, x, m);
}

double solve_geometric_recursion(double u0, double rate, std::span<const GeometricForcing> forcing, std::size_t n) {
    const long e = static_cast<long>(n);
    double homogeneous = u0;
    double particular = 0.0;
    for (const auto& term : forcing) {
        if (term.base == rate) throw ParameterError("geometric recursion: forcing base equals the rate");
        const double c = term.coef / (term.base - rate);
        homogeneous -= c;
        particular += c * ipow(term.base, e);
    }
    return ipow(rate, e) * homogeneous + particular;
}

double bprf_product_moment(std::size_t p, std::size_t d, double x, double delta) {
    if (d < 1) throw ParameterError("bprf moments need d >= 1");
    check_unit(x);
    const double dd = static_cast<double>(d);
    return std::pow(1.0 - delta / (dd * (delta + 1.0)), static_cast<double>(p)) * std::pow(x * (1.0 - x), delta);
}

MomentSet bprf_moments(std::size_t p, std::size_t d, std::span<const double> x) {
    if (d < 1) throw ParameterError("bprf moments need d >= 1");
    if (x.size() != d) throw DomainError("bprf moments: point dimension does not match d");
    const double dd = static_cast<double>(d);
    // Per-level contraction factors when coordinate i is split with probability 1/d.
    const double a = 1.0 - 1.0 / (2.0 * dd);
    const double b = 1.0 - 2.0 / (3.0 * dd);
    const double c = 1.0 - 3.0 / (4.0 * dd);
    const double e = 1.0 - 4.0 / (5.0 * dd);
    MomentSet m;
    m.model = ModelKind::Bprf;
    m.param = p;
    m.x.assign(x.begin(), x.end());
    for (std::size_t i = 0; i < d; ++i) {
        const double xi = x[i];
        check_unit(xi);
        const double u = xi * (1.0 - xi);
        const double q = xi * xi + (1.0 - xi) * (1.0 - xi);
        CoordinateMoments cm;
        cm.diff = solve_geometric_recursion(2.0 * xi - 1.0, a, {}, p);
        cm.ab = solve_geometric_recursion(u, a, {}, p);
        const std::array<GeometricForcing, 1> f2{{{2.0 * u / (3.0 * dd), a}}};
        cm.sum2 = solve_geometric_recursion(q, b, f2, p);
        // E[alpha beta (alpha^2 + beta^2)] feeds the fourth-moment recursion.
        const double u2 = u * u;
        // It solves aux_{n+1} = c aux_n + (u^2 / 4d) b^n, i.e. aux_b b^n + (aux0 - aux_b) c^n.
        const double aux0 = u * q;
        const double aux_b = u2 / (4.0 * dd) / (b - c);
        const std::array<GeometricForcing, 2> f4{{{4.0 / (5.0 * dd) * (aux_b - u2), b},
                                                  {4.0 / (5.0 * dd) * (aux0 - aux_b), c}}};
        cm.sum4 = solve_geometric_recursion(ipow(xi, 4) + ipow(1.0 - xi, 4), e, f4, p);
        cm.sum3 = std::pow(2.0, 2.5) * std::pow(b, 0.75 * static_cast<double>(p));
        cm.sum3_is_bound = true;
        m.coords.push_back(cm);
    }
    m.cross.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) {
                m.cross[i * d + j] = m.coords[i].sum2 - 2.0 * m.coords[i].ab;
            } else {
                const double start = (2.0 * x[i] - 1.0) * (2.0 * x[j] - 1.0);
                m.cross[i * d + j] = solve_geometric_recursion(start, 1.0 - 1.0 / dd, {}, p);
            }
        }
    }
    return m;
}

MomentSet closed_form_moments(const ModelSpec& spec, std::span<const double> x) {
    spec.validate();
    switch (spec.kind) {
        case ModelKind::Toy:
            if (x.size() != 1) throw DomainError("toy moments: x must be one-dimensional");
            return toy_moments(spec.k, x[0]);
        case ModelKind::Purf:
            if (x.size() != 1) throw DomainError("purf moments: x must be one-dimensional");
            return purf_moments(spec.k, x[0]);
        case ModelKind::Bprf:
            return bprf_moments(spec.k, spec.dim, x);
        default:
            throw UnsupportedError(std::string("no closed-form moments for model ") +
                                   std::string(model_name(spec.kind)));
    }
}

Interval PointwiseExpansion::binf_band_c2() const {
    const double m = std::abs(m1);
    return {std::max(0.0, m * m - 2.0 * m * r2), (m + r2) * (m + r2)};
}

Interval PointwiseExpansion::vtree_band_c2() const {
    const double center = variance_center();
    const double half = 2.0 * std::sqrt(std::max(0.0, r4 * center)) + r4;
    return {center - half, center + half};
}

std::optional<Interval> PointwiseExpansion::binf_band_c3() const {
    if (!r3) return std::nullopt;
    const double center = (m1 + m2) * (m1 + m2);
    const double half = 2.0 * std::abs(*r3 * (m1 + m2)) + *r3 * *r3;
    return Interval{center - half, center + half};
}

PointwiseExpansion pointwise_expansion(const MomentSet& moments, const RegressionFn& f) {
    const auto& sm = require_c2(f);
    const std::size_t d = moments.dim();
    if (f.dim() != d) throw DomainError("pointwise expansion: function and moment dimensions differ");
    const auto g = f.gradient(moments.x);
    const auto h = f.hessian(moments.x);
    PointwiseExpansion q;
    double sum2_minus_ab = 0.0, sum3 = 0.0, sum4 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const auto& c = moments.coords[i];
        q.m1 -= 0.5 * g[i] * c.diff;
        q.m2 += h[i * d + i] * (c.sum2 - c.ab) / 6.0;
        q.n2 += 0.25 * g[i] * g[i] * (c.sum2 - 2.0 * c.ab);
        for (std::size_t j = 0; j < d; ++j) {
            if (j == i) continue;
            q.m2 += h[i * d + j] * moments.cross_at(i, j) / 8.0;
            q.n2 += 0.25 * g[i] * g[j] * moments.cross_at(i, j);
        }
        sum2_minus_ab += c.sum2 - c.ab;
        sum3 += c.sum3;
        sum4 += c.sum4;
    }
    q.r2 = *sm.c2 / 3.0 * sum2_minus_ab;
    q.r4 = 2.0 * static_cast<double>(d) * *sm.c2 * *sm.c2 / 9.0 * sum4;
    if (sm.c3) q.r3 = *sm.c3 / 4.0 * sum3;
    return q;
}

PointwiseExpansion pointwise_expansion(const ModelSpec& spec, const RegressionFn& f, std::span<const double> x) {
    return pointwise_expansion(closed_form_moments(spec, x), f);
}

TheoreticalBias theoretical_bias(const ModelSpec& spec, const RegressionFn& f, const BorderPolicy& policy) {
    spec.validate();
    const auto& sm = require_c2(f);
    if (f.dim() != spec.dim) throw DomainError("theoretical_bias: model and function dimensions differ");
    const double c2 = *sm.c2;
    const std::optional<double> c3 = sm.c3;
    TheoreticalBias out;
    auto grad_sq = [&f](double lo, double hi) { return f.integral_grad_sq(lo, hi); };
    auto second_sq = [&f](double lo, double hi) { return f.integral_second_sq(lo, hi); };

    switch (spec.kind) {
        case ModelKind::Toy: {
            const double k = static_cast<double>(spec.k);
            const double d1 = sm.sup_grad, d2 = sm.sup_hessian.value_or(0.0);
            if (!policy.borderless()) {
                out.binf = integrate_1d(
                               [&](double t) {
                                   const double l = first_derivative(f, t), r = first_derivative(f, 1.0 - t);
                                   return (l * l + r * r) * ipow(1.0 - k * t, 4);
                               },
                               0.0, 1.0 / k) /
                           (16.0 * k * k);
                if (c3) out.binf_band = (d1 * d2 + 2 * *c3 * d1 + d2 * d2 + 2 * *c3 * d2 + 4 * *c3 * *c3) / (2 * ipow(k, 4));
                out.binf_upper = d1 * d1 / (8 * ipow(k, 3)) + (c2 * d1 + 2 * c2 * c2) / ipow(k, 4);
                out.vtree = grad_sq(0.0, 1.0) / (12 * k * k);
                out.vtree_band = (2 * d1 * c2 + c2 * c2 + 3 * d1 * d1) / ipow(k, 3);
            } else {
                const double eps = policy.epsilon(spec.k);
                if (eps < 1.0 / k) throw UnsupportedError("toy interior results need a border of at least 1/k");
                out.epsilon = eps;
                out.binf = second_sq(eps, 1.0 - eps) / (144 * ipow(k, 4));
                if (c3) out.binf_band = 3 * *c3 * (d2 + 1.5 * *c3) / (4 * ipow(k, 5));
                out.binf_upper = c2 * c2 / (36 * ipow(k, 4));
                out.vtree = grad_sq(eps, 1.0 - eps) / (12 * k * k);
                out.vtree_band = (2 * d1 * c2 + c2 * c2) / ipow(k, 3) * (1.0 - 2.0 * eps);
            }
            return out;
        }
        case ModelKind::Purf: {
            if (spec.k < 27) throw UnsupportedError("purf predictions need k >= 27");
            const double k = static_cast<double>(spec.k);
            const double logk = std::log(k);
            const double d1 = sm.sup_grad, d2 = sm.sup_hessian.value_or(0.0);
            if (!policy.borderless()) {
                const double s0 = first_derivative(f, 0.0), s1 = first_derivative(f, 1.0);
                out.binf = (s0 * s0 + s1 * s1) / (8 * ipow(k, 3));
                if (c3) out.binf_band = 6 * (*c3 + d1 + d2) * (*c3 + d1 + d2) * logk / ipow(k, 4);
                out.binf_upper = 4 * d1 * d1 * logk / ipow(k, 3) + 2 * c2 * c2 / ipow(k, 4);
                out.vtree = grad_sq(0.0, 1.0) / (2 * k * k);
                out.vtree_band = 6 * ((logk + 1) * d1 * d1 + c2 * c2) / ipow(k, 3);
            } else {
                const double eps = policy.epsilon(spec.k);
                if (eps < 4.0 * logk / k) throw UnsupportedError("purf interior results need a border of at least 4 log(k)/k");
                out.epsilon = eps;
                out.binf = second_sq(eps, 1.0 - eps) / (4 * ipow(k, 4));
                if (c3) {
                    const double w = 3 * *c3 + d1 / (27.0 * 27.0) + 2 * d2;
                    out.binf_band = w * w / ipow(k, 5);
                }
                out.binf_upper = 2 * c2 * c2 / ipow(k, 4) + d1 * d1 / (2 * ipow(k, 6));
                out.vtree = grad_sq(eps, 1.0 - eps) / (2 * k * k);
                out.vtree_band = 5 * (d1 + c2) * (d1 + c2) / ipow(k, 3) * (1.0 - 2.0 * eps);
            }
            return out;
        }
        case ModelKind::Bprf: {
            if (spec.k < 2) throw UnsupportedError("bprf predictions need depth p >= 2");
            if (policy.borderless()) throw UnsupportedError("bprf predictions are for the full cube only");
            const double dd = static_cast<double>(spec.dim);
            const double p = static_cast<double>(spec.k);
            const double ap = std::pow(1.0 - 1.0 / (2 * dd), p);
            const double bp = std::pow(1.0 - 2.0 / (3 * dd), p);
            const auto cube = bprf_cube_integrals(f);
            const double grad2 = sm.sup_grad * sm.sup_grad;
            const double entry = sm.sup_hessian_entry.value_or(0.0);
            out.binf = 0.25 * ap * ap * cube.drift_curv;
            if (c3) out.binf_band = 6 * ipow(dd, 4) * std::pow(bp, 0.75) * ap * (grad2 + entry * entry + *c3 * *c3);
            out.binf_upper = ap * ap * (0.5 * cube.drift + 2 * dd * dd * c2 * c2);
            out.vtree = 0.5 * ap * cube.spread;
            out.vtree_band = dd / 4 * grad2 * ap * ap +
                             (dd * sm.sup_partial * sm.sup_partial + dd * dd * sm.sup_offdiag.value_or(0.0) +
                              5 * dd * c2 * c2) *
                                 std::sqrt(ap * bp);
            return out;
        }
        default:
            throw UnsupportedError(std::string("no theoretical prediction for model ") +
                                   std::string(model_name(spec.kind)));
    }
}

double bprf_alpha(std::size_t d) {
    if (d < 1) throw ParameterError("d must be at least 1");
    return -std::log2(1.0 - 1.0 / (2.0 * static_cast<double>(d)));
}

RateExponents rate_exponents(ModelKind model, std::size_t d) {
    switch (model) {
        case ModelKind::Toy:
        case ModelKind::Purf:
            return {-2.0, -3.0, -4.0, std::nullopt};
        case ModelKind::Bprf: {
            const double alpha = bprf_alpha(d);
            const double beta = -std::log2(2.0 * (1.0 - 2.0 / (3.0 * static_cast<double>(d))));
            return {-alpha, -2.0 * alpha, std::nullopt, beta};
        }
        default:
            throw UnsupportedError(std::string(model_name(model)) + ": no theoretical exponent");
    }
}

BprfGeometry bprf_geometry(std::size_t p, std::size_t d) {
    if (d < 1) throw ParameterError("d must be at least 1");
    const double dd = static_cast<double>(d);
    return {dd * std::pow(2.0 * (1.0 - 2.0 / (3.0 * dd)), static_cast<double>(p)), (1.0 + 4.0 * std::exp(-1.0)) / 5.0};
}

double bprf_volume_sum_bound(std::size_t p, double n, double u) {
    if (!(u > 0.0)) throw ParameterError("u must be positive");
    const double pd = static_cast<double>(p);
    return std::pow(2.0, pd) * (1.0 / u + (1.0 - 1.0 / u) * std::exp(-n * std::exp(-(pd + std::sqrt(u * pd)))));
}

double toy_kernel(std::size_t k, double u) {
    if (k < 2) throw ParameterError("toy kernel needs k >= 2");
    const double kd = static_cast<double>(k);
    const double r = 1.0 - kd * std::abs(u);
    return r > 0.0 ? kd * r : 0.0;
}

double kernel_bias_integral(const RegressionFn& f, std::size_t k, double x) {
    if (k < 2) throw ParameterError("toy kernel needs k >= 2");
    if (f.dim() != 1) throw UnsupportedError("kernel integrals are one-dimensional");
    const double kd = static_cast<double>(k);
    const double c = 1.0 / kd;
    if (!(x >= c && x <= 1.0 - c)) {
        std::ostringstream os;
        os << "kernel integral needs x in [1/k, 1 - 1/k], got " << x;
        throw DomainError(os.str());
    }
    switch (f.kind()) {
        case FunctionKind::Sinusoidal: {
            const double w = 2 * pi;
            return 2 * std::sin(w * x) * kd * kd * (1 - std::cos(w * c)) / (w * w);
        }
        case FunctionKind::Sum:
            return x;
        case FunctionKind::AbsoluteValue: {
            // E|y + U| with U triangular on [-c, c]; plus(a) = E[(a - U)_+].
            const double y = x - 0.5;
            auto plus = [kd, c](double a) {
                if (a <= -c) return 0.0;
                if (a >= c) return a;
                return a <= 0.0 ? kd * kd * ipow(a + c, 3) / 6.0 : a + kd * kd * ipow(c - a, 3) / 6.0;
            };
            return plus(y) + plus(-y);
        }
        default:
            throw UnsupportedError("no kernel antiderivative for this function");
    }
}

}  // namespace prf
