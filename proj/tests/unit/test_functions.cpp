#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "prf/errors.hpp"
#include "prf/functions.hpp"
#include "prf/rng.hpp"
#include "support/stats.hpp"

using namespace prf;
using std::numbers::pi;

namespace {

double average_on(const RegressionFn& f, const std::vector<double>& lo, const std::vector<double>& hi) {
    return f.cell_average(CellView{lo, hi});
}

double gk(const std::function<double(double)>& g, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 15, 1e-14);
}

std::vector<RegressionFn> all_functions() {
    return {RegressionFn(FunctionKind::Sinusoidal, 1), RegressionFn(FunctionKind::AbsoluteValue, 1),
            RegressionFn(FunctionKind::Sum, 4), RegressionFn(FunctionKind::Friedman1, 6)};
}

}  // namespace

TEST_CASE("function names parse and unknown names list the choices") {
    CHECK(parse_function("abs") == FunctionKind::AbsoluteValue);
    CHECK(parse_function("friedman1") == FunctionKind::Friedman1);
    CHECK_THROWS_WITH_AS(parse_function("cosine"), doctest::Contains("sinusoidal"), ParameterError);
    CHECK_THROWS_AS(RegressionFn(FunctionKind::Friedman1, 4), ParameterError);
    CHECK_THROWS_AS(RegressionFn(FunctionKind::Sinusoidal, 2), ParameterError);
}

TEST_CASE("point values") {
    const double q[] = {0.25};
    CHECK(RegressionFn(FunctionKind::Sinusoidal, 1).eval(q) == doctest::Approx(1.0));
    const double h[] = {0.5, 0.5, 0.5};
    CHECK(RegressionFn(FunctionKind::Sum, 3).eval(h) == doctest::Approx(1.5));
    const double fr[] = {0.5, 0.5, 0.5, 0.0, 0.0};
    CHECK(RegressionFn(FunctionKind::Friedman1, 5).eval(fr) == doctest::Approx(0.7071068).epsilon(1e-7));
    const double two[] = {0.5, 0.5};
    CHECK_THROWS_AS(RegressionFn(FunctionKind::Sum, 3).eval(two), DomainError);
}

TEST_CASE("cell averages with closed forms") {
    CHECK(average_on(RegressionFn(FunctionKind::Sum, 2), {0, 0}, {1, 1}) == doctest::Approx(1.0));
    CHECK(average_on(RegressionFn(FunctionKind::Sinusoidal, 1), {0}, {0.5}) ==
          doctest::Approx(2.0 / pi).epsilon(1e-14));
    CHECK(average_on(RegressionFn(FunctionKind::AbsoluteValue, 1), {0}, {1}) == doctest::Approx(0.25));
    CHECK(average_on(RegressionFn(FunctionKind::Sum, 1), {0.2}, {0.6}) == doctest::Approx(0.4));
}

TEST_CASE("cell averages agree with adaptive quadrature") {
    const RegressionFn sinus(FunctionKind::Sinusoidal, 1), absf(FunctionKind::AbsoluteValue, 1);
    Engine eng(21);
    for (int r = 0; r < 50; ++r) {
        double a = uniform01(eng), b = uniform01(eng);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-6) continue;
        for (const auto* f : {&sinus, &absf}) {
            const double ref = gk(
                                   [&](double t) {
                                       const double x[] = {t};
                                       return f->eval(x);
                                   },
                                   a, b) /
                               (b - a);
            CHECK(average_on(*f, {a}, {b}) == doctest::Approx(ref).epsilon(1e-10).scale(1.0));
        }
    }
    const RegressionFn fr(FunctionKind::Friedman1, 5);
    for (int r = 0; r < 10; ++r) {
        std::vector<double> lo(5), hi(5);
        for (std::size_t j = 0; j < 5; ++j) {
            lo[j] = 0.5 * uniform01(eng);
            hi[j] = lo[j] + 0.05 + 0.45 * uniform01(eng);
        }
        const double sin_face = gk(
            [&](double u) {
                return gk([&](double v) { return std::sin(pi * u * v); }, lo[1], hi[1]);
            },
            lo[0], hi[0]) / ((hi[0] - lo[0]) * (hi[1] - lo[1]));
        const double quad = gk([](double t) { return 2.0 * (t - 0.5) * (t - 0.5); }, lo[2], hi[2]) / (hi[2] - lo[2]);
        const double ref = sin_face + quad + 0.5 * (lo[3] + hi[3]) + 0.25 * (lo[4] + hi[4]);
        CHECK(average_on(fr, lo, hi) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("cell averages agree with plain Monte Carlo") {
    const RegressionFn fr(FunctionKind::Friedman1, 5);
    const std::vector<double> lo{0.1, 0.2, 0.0, 0.3, 0.5}, hi{0.9, 0.7, 0.6, 0.4, 1.0};
    Engine eng(22);
    prf::testing::MeanAccumulator acc;
    std::vector<double> x(5);
    for (int r = 0; r < 1000000; ++r) {
        for (std::size_t j = 0; j < 5; ++j) x[j] = lo[j] + (hi[j] - lo[j]) * uniform01(eng);
        acc.add(fr.eval(x));
    }
    CHECK(std::abs(acc.z(average_on(fr, lo, hi))) < 4.0);
}

TEST_CASE("global means and refinement consistency") {
    CHECK(RegressionFn(FunctionKind::Sinusoidal, 1).global_mean() == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(RegressionFn(FunctionKind::AbsoluteValue, 1).global_mean() == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(RegressionFn(FunctionKind::Sum, 7).global_mean() == doctest::Approx(3.5).epsilon(1e-10));
    Engine eng(23);
    for (const auto& f : all_functions()) {
        const std::size_t d = f.dim();
        const std::vector<double> ones(d, 1.0), zeros(d, 0.0);
        CHECK(average_on(f, zeros, ones) == doctest::Approx(f.global_mean()).epsilon(1e-10).scale(1.0));
        for (int r = 0; r < 20; ++r) {
            std::vector<double> lo(d), hi(d);
            for (std::size_t j = 0; j < d; ++j) {
                lo[j] = 0.5 * uniform01(eng);
                hi[j] = lo[j] + 0.1 + 0.4 * uniform01(eng);
            }
            const std::size_t j = uniform_index(eng, d);
            const double t = lo[j] + (hi[j] - lo[j]) * (0.1 + 0.8 * uniform01(eng));
            auto left_hi = hi, right_lo = lo;
            left_hi[j] = t;
            right_lo[j] = t;
            const double w = (t - lo[j]) / (hi[j] - lo[j]);
            const double parent = average_on(f, lo, hi);
            const double children = w * average_on(f, lo, left_hi) + (1 - w) * average_on(f, right_lo, hi);
            CHECK(children == doctest::Approx(parent).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("derivatives match central finite differences") {
    Engine eng(24);
    const double h = 1e-5;
    for (const auto& f : all_functions()) {
        const std::size_t d = f.dim();
        for (int r = 0; r < 100; ++r) {
            std::vector<double> x(d);
            for (auto& v : x) v = 0.01 + 0.98 * uniform01(eng);
            if (f.kind() == FunctionKind::AbsoluteValue && std::abs(x[0] - 0.5) < 2 * h) continue;
            const auto g = f.gradient(x);
            const auto hess = f.hessian(x);
            for (std::size_t i = 0; i < d; ++i) {
                auto up = x, dn = x;
                up[i] += h;
                dn[i] -= h;
                const double fd = (f.eval(up) - f.eval(dn)) / (2 * h);
                CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
                const auto gu = f.gradient(up), gd = f.gradient(dn);
                for (std::size_t j = 0; j < d; ++j) {
                    CHECK(hess[i * d + j] == doctest::Approx(hess[j * d + i]));
                    CHECK(hess[j * d + i] == doctest::Approx((gu[j] - gd[j]) / (2 * h)).epsilon(1e-5).scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("named derivative values") {
    const double half[] = {0.5};
    CHECK(RegressionFn(FunctionKind::Sinusoidal, 1).gradient(half)[0] == doctest::Approx(-2 * pi));
    const double pt[] = {0.1, 0.2, 0.3, 0.4};
    for (double g : RegressionFn(FunctionKind::Sum, 4).gradient(pt)) CHECK(g == 1.0);
    const double fx[] = {0.3, 0.6, 0.9, 0.1, 0.2};
    CHECK(RegressionFn(FunctionKind::Friedman1, 5).hessian(fx)[2 * 5 + 2] == doctest::Approx(4.0));
    CHECK_THROWS_WITH_AS(RegressionFn(FunctionKind::AbsoluteValue, 1).gradient(half),
                         doctest::Contains("not differentiable"), DomainError);
}

TEST_CASE("smoothness constants") {
    const auto& sin_s = RegressionFn(FunctionKind::Sinusoidal, 1).smoothness();
    CHECK(*sin_s.c2 == doctest::Approx(2 * pi * pi));
    CHECK(*sin_s.c3 == doctest::Approx(std::pow(2 * pi, 3) / 6));
    const auto& sum_s = RegressionFn(FunctionKind::Sum, 3).smoothness();
    CHECK(*sum_s.c2 == 0.0);
    CHECK(*sum_s.c3 == 0.0);
    const auto& abs_s = RegressionFn(FunctionKind::AbsoluteValue, 1).smoothness();
    CHECK_FALSE(abs_s.c2.has_value());
    CHECK_FALSE(abs_s.c3.has_value());
    const RegressionFn fr(FunctionKind::Friedman1, 5);
    Engine eng(25);
    double worst = 0.0;
    for (int r = 0; r < 20000; ++r) {
        std::vector<double> x(5);
        for (auto& v : x) v = uniform01(eng);
        const auto hs = fr.hessian(x);
        for (double v : hs) worst = std::max(worst, std::abs(v));
    }
    CHECK(worst <= *fr.smoothness().sup_hessian_entry + 1e-12);
}

TEST_CASE("one-dimensional derivative integrals") {
    const RegressionFn f(FunctionKind::Sinusoidal, 1);
    CHECK(f.integral_grad_sq(0, 1) == doctest::Approx(2 * pi * pi));
    CHECK(f.integral_second_sq(0, 1) == doctest::Approx(8 * std::pow(pi, 4)));
    const double ref = gk([](double t) { return std::pow(4 * pi * pi * std::sin(2 * pi * t), 2); }, 0.2, 0.7);
    CHECK(f.integral_second_sq(0.2, 0.7) == doctest::Approx(ref).epsilon(1e-10));
    CHECK_THROWS_AS(RegressionFn(FunctionKind::AbsoluteValue, 1).integral_second_sq(0, 1), UnsupportedError);
}
