#include <doctest.h>

#include <cmath>
#include <vector>

#include "prf/estimators.hpp"
#include "prf/models.hpp"
#include "prf/oracles.hpp"
#include "support/stats.hpp"

using namespace prf;
using prf::testing::MeanAccumulator;

namespace {

Partition halves() {
    Partition p(1);
    const double a[] = {0.0}, b[] = {0.5}, c[] = {1.0};
    p.add_cell(a, b);
    p.add_cell(b, c);
    return p;
}

}  // namespace

TEST_CASE("noise-free data reproduces the target") {
    const RegressionFn f(FunctionKind::Sum, 3);
    Engine eng(31);
    const auto data = generate_dataset(f, 100, 0.0, eng);
    REQUIRE(data.size() == 100);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(data.ys[i] == doctest::Approx(f.eval(data.point(i))));
}

TEST_CASE("noise level and design distribution") {
    const RegressionFn f(FunctionKind::Sinusoidal, 1);
    Engine eng(32);
    const auto data = generate_dataset(f, 10000, 0.25, eng);
    MeanAccumulator noise, xs;
    for (std::size_t i = 0; i < data.size(); ++i) {
        noise.add(data.ys[i] - f.eval(data.point(i)));
        xs.add(data.xs[i]);
    }
    CHECK(std::abs(noise.variance() - 0.0625) < 0.004);
    CHECK(std::abs(xs.z(0.5)) < 3.0);
    CHECK_THROWS_AS(generate_dataset(f, 0, 0.1, eng), ParameterError);
    CHECK_THROWS_AS(generate_dataset(f, 5, -1.0, eng), ParameterError);
}

TEST_CASE("regressogram leaf means and the empty-leaf convention") {
    Dataset data{1, {0.1, 0.2, 0.3}, {1.0, 2.0, 3.0}, 0.0};
    const auto single = fit_tree(Partition::unit(1), data);
    const double at[] = {0.9};
    CHECK(single.predict(at) == doctest::Approx(2.0));

    const auto tree = fit_tree(halves(), data);
    const double right[] = {0.75}, left[] = {0.25};
    CHECK(tree.predict(right) == 0.0);
    CHECK(tree.predict(left) == doctest::Approx(2.0));
    CHECK(tree.empty_leaves() == 1);
    CHECK(tree.leaf_counts()[0] + tree.leaf_counts()[1] == 3);
}

TEST_CASE("forests average their trees and ignore tree order") {
    Dataset data{1, {0.1, 0.4, 0.6, 0.8}, {1.0, 2.0, 5.0, 7.0}, 0.0};
    const auto t1 = fit_tree(halves(), data);
    const auto t2 = fit_tree(Partition::unit(1), data);
    const ForestEstimator same({t1, t1});
    const ForestEstimator ab({t1, t2}), ba({t2, t1});
    for (double x : {0.05, 0.45, 0.55, 0.95}) {
        const double pt[] = {x};
        CHECK(same.predict(pt) == doctest::Approx(t1.predict(pt)));
        CHECK(ab.predict(pt) == doctest::Approx(0.5 * (t1.predict(pt) + t2.predict(pt))));
        CHECK(ab.predict(pt) == ba.predict(pt));
    }
    CHECK_THROWS_AS(ForestEstimator({}), ParameterError);
}

TEST_CASE("population projection") {
    const RegressionFn sum1(FunctionKind::Sum, 1);
    Partition p(1);
    const double a[] = {0.0}, b[] = {0.2}, c[] = {0.6}, e[] = {1.0};
    p.add_cell(a, b);
    p.add_cell(b, c);
    p.add_cell(c, e);
    CHECK(population_projection(p, sum1)[1] == doctest::Approx(0.4));
    const RegressionFn sinus(FunctionKind::Sinusoidal, 1);
    for (double x : {0.1, 0.5, 0.9}) {
        const double pt[] = {x};
        CHECK(s_tilde(Partition::unit(1), sinus, pt) == doctest::Approx(sinus.global_mean()).scale(1.0));
    }
}

TEST_CASE("averaged toy projections follow the hat kernel") {
    const RegressionFn f(FunctionKind::Sinusoidal, 1);
    const SeedSpec seeds(33);
    MeanAccumulator acc;
    Partition p;
    const double x[] = {0.5};
    for (std::uint64_t r = 0; r < 10000; ++r) {
        auto eng = seeds.stream(StreamKind::Generic, r);
        sample_toy(10, eng, p);
        acc.add(s_tilde(p, f, x));
    }
    CHECK(std::abs(acc.z(kernel_bias_integral(f, 10, 0.5))) < 4.0);
}

TEST_CASE("a tree on abundant noise-free data approaches the projection") {
    const RegressionFn f(FunctionKind::Sinusoidal, 1);
    Engine eng(34);
    Partition p;
    sample_purf(8, eng, p);
    const auto data = generate_dataset(f, 100000, 0.0, eng);
    const auto tree = fit_tree(p, data);
    const auto beta = population_projection(p, f);
    for (std::size_t c = 0; c < p.size(); ++c) {
        // Within-cell spread of s bounds the sampling error of the leaf mean.
        const auto cell = p.cell_copy(c);
        const double n_c = static_cast<double>(tree.leaf_counts()[c]);
        REQUIRE(n_c > 0);
        const double spread = 2 * std::numbers::pi * (cell.upper[0] - cell.lower[0]);
        CHECK(std::abs(tree.leaf_values()[c] - beta[c]) <= 3.0 * spread / std::sqrt(n_c) + 1e-12);
    }
}
