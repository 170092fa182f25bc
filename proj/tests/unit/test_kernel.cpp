#include <doctest.h>

#include <cmath>

#include "prf/errors.hpp"
#include "prf/kernel.hpp"
#include "prf/oracles.hpp"

using namespace prf;

TEST_CASE("uniform grid") {
    const auto g = uniform_grid();
    REQUIRE(g.size() == 513);
    CHECK(g.front() == 0.0);
    CHECK(g[256] == 0.5);
    CHECK(g.back() == 1.0);
}

TEST_CASE("toy kernel estimate: peak, support and closed-form distance") {
    const auto grid = uniform_grid();
    const auto t = estimate_kernel({ModelKind::Toy, 128, 1}, 0.5, grid, 10000, 3);
    const std::size_t centre = 256;
    CHECK(std::abs(t.h[centre] - 128.0) <= 3 * t.se[centre]);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = grid[i] - 0.5;
        if (std::abs(u) >= 1.0 / 128) CHECK(t.h[i] == 0.0);
        worst = std::max(worst, std::abs(t.h[i] - toy_kernel(128, u)));
        CHECK(t.h[i] >= 0.0);
    }
    CHECK(worst <= 0.05 * 128);
    CHECK(std::abs(t.mass.value - 1.0) <= 3 * t.mass.se + 1e-12);
}

TEST_CASE("single-cell model has a flat unit kernel") {
    const auto grid = uniform_grid(64);
    const auto t = estimate_kernel({ModelKind::Ubprf, 0, 1}, 0.3, grid, 100, 1);
    for (double h : t.h) CHECK(h == 1.0);
    CHECK(t.mass.value == doctest::Approx(1.0));
}

TEST_CASE("unit mass across models") {
    const auto grid = uniform_grid();
    for (const ModelSpec& spec : {ModelSpec{ModelKind::Toy, 20, 1}, ModelSpec{ModelKind::Purf, 20, 1},
                                  ModelSpec{ModelKind::Bprf, 5, 1}, ModelSpec{ModelKind::Ubprf, 20, 1}}) {
        const auto t = estimate_kernel(spec, 0.37, grid, 2000, 4);
        CAPTURE(model_name(spec.kind));
        CHECK(std::abs(t.mass.value - 1.0) <= 3 * t.mass.se + 1e-9);
    }
}

TEST_CASE("balanced kernel is flatter than the toy kernel at the same leaf count") {
    const auto grid = uniform_grid();
    const auto bprf = estimate_kernel({ModelKind::Bprf, 7, 1}, 0.5, grid, 10000, 5);
    const auto toy = estimate_kernel({ModelKind::Toy, 127, 1}, 0.5, grid, 10000, 5);
    CHECK(std::isfinite(bprf.h[256]));
    double sup_b = 0.0, sup_t = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double dist = std::abs(grid[i] - 0.5);
        if (dist < 0.05 || dist > 0.2) continue;
        sup_b = std::max(sup_b, bprf.h[i]);
        sup_t = std::max(sup_t, toy.h[i]);
    }
    CHECK(sup_b > sup_t);
}

TEST_CASE("kernel input checks") {
    const auto grid = uniform_grid(8);
    CHECK_THROWS_AS(estimate_kernel({ModelKind::Bprf, 3, 2}, 0.5, grid, 10, 1), UnsupportedError);
    CHECK_THROWS_AS(estimate_kernel({ModelKind::Toy, 8, 1}, 1.0, grid, 10, 1), DomainError);
    CHECK_THROWS_AS(estimate_kernel({ModelKind::Toy, 8, 1}, 0.5, grid, 0, 1), ParameterError);
}
