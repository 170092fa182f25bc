#include <doctest.h>

#include <vector>

#include "prf/errors.hpp"
#include "prf/geometry.hpp"
#include "prf/models.hpp"

using namespace prf;

namespace {

Partition two_columns(double cut) {
    Partition p(2);
    const double l0[] = {0.0, 0.0}, u0[] = {cut, 1.0}, l1[] = {cut, 0.0}, u1[] = {1.0, 1.0};
    p.add_cell(l0, u0);
    p.add_cell(l1, u1);
    return p;
}

std::vector<double> probe_points(std::size_t d, std::size_t n, std::uint64_t seed) {
    Engine eng(seed);
    std::vector<double> out(n * d);
    for (auto& v : out) v = uniform01(eng);
    return out;
}

}  // namespace

TEST_CASE("single-cell partition contains every point") {
    const auto p = Partition::unit(1);
    const double x[] = {0.7};
    CHECK(p.locate(x) == 0);
    const auto c = p.cell_copy(0);
    CHECK(c.lower[0] == 0.0);
    CHECK(c.upper[0] == 1.0);
}

TEST_CASE("a boundary point belongs to the cell on its right") {
    Partition toy;
    toy_partition(2, 0.0, toy);
    const double x[] = {0.5};
    const auto c = toy.cell_copy(toy.locate(x));
    CHECK(c.lower[0] == 0.5);
    CHECK(c.upper[0] == 1.0);

    const auto cols = two_columns(0.3);
    const double y[] = {0.3, 0.9};
    CHECK(cols.locate(y) == 1);
}

TEST_CASE("face distances on hand-built cells") {
    const auto unit = Partition::unit(1);
    const double x[] = {0.25};
    auto fd = unit.cell_bounds_at(x);
    CHECK(fd.alpha[0] == doctest::Approx(0.25));
    CHECK(fd.beta[0] == doctest::Approx(0.75));

    Partition toy;
    toy_partition(4, 0.0, toy);
    const double x2[] = {0.6};
    fd = toy.cell_bounds_at(x2);
    CHECK(fd.alpha[0] == doctest::Approx(0.1));
    CHECK(fd.beta[0] == doctest::Approx(0.15));

    Partition p(2);
    const double lo[] = {0.0, 0.25}, hi[] = {0.5, 1.0};
    p.add_cell(lo, hi);
    const double x3[] = {0.1, 0.5};
    const auto c = p.cell(0);
    CHECK(c.contains(x3));
    CHECK(c.volume() == doctest::Approx(0.375));
}

TEST_CASE("points off the cube are domain errors and gaps are invariant errors") {
    const auto p = Partition::unit(2);
    const double out[] = {1.0, 0.2};
    const double neg[] = {-0.1, 0.2};
    const double wrong_dim[] = {0.2};
    CHECK_THROWS_AS(p.locate(out), DomainError);
    CHECK_THROWS_AS(p.locate(neg), DomainError);
    CHECK_THROWS_AS(p.locate(wrong_dim), DomainError);

    Partition gap(1);
    const double lo[] = {0.0}, hi[] = {0.5};
    gap.add_cell(lo, hi);
    const double x[] = {0.75};
    CHECK_THROWS_AS(gap.locate(x), InvariantError);
    CHECK_THROWS_AS(gap.validate(), InvariantError);
}

TEST_CASE("degenerate cells are rejected at construction") {
    Partition p(1);
    const double lo[] = {0.5}, hi[] = {0.5};
    CHECK_THROWS_AS(p.add_cell(lo, hi), ParameterError);
    const double lo2[] = {0.0, 0.0}, hi2[] = {1.0, 1e-301};
    Partition q(2);
    CHECK_THROWS_AS(q.add_cell(lo2, hi2), ParameterError);
}

TEST_CASE("split_cell keeps volumes additive and the tree locator agrees with the scan") {
    Partition p = Partition::unit(3);
    Engine eng(3);
    for (int s = 0; s < 40; ++s) {
        const std::size_t c = uniform_index(eng, p.size());
        const std::size_t coord = uniform_index(eng, 3);
        const auto cell = p.cell_copy(c);
        const double t = cell.lower[coord] + (0.1 + 0.8 * uniform01(eng)) * (cell.upper[coord] - cell.lower[coord]);
        p.split_cell(c, coord, t);
    }
    CHECK(p.size() == 41);
    CHECK(p.locator() == Partition::Locator::Tree);
    const auto probes = probe_points(3, 2000, 9);
    CHECK_NOTHROW(p.validate(probes));
}

TEST_CASE("every sampler yields a valid partition whose fast locator matches the scan") {
    const auto probes1 = probe_points(1, 10000, 1);
    const auto probes3 = probe_points(3, 10000, 2);
    const SeedSpec seeds(17);
    std::vector<ModelSpec> specs{
        {ModelKind::Toy, 7, 1},  {ModelKind::Purf, 9, 1},     {ModelKind::Bprf, 5, 1},
        {ModelKind::Bprf, 6, 3}, {ModelKind::Ubprf, 20, 3},   {ModelKind::Midpoint, 5, 3},
        {ModelKind::Ubprf, 0, 1}, {ModelKind::Toy, 64, 1}, {ModelKind::Purf, 1, 1},
    };
    for (const auto& spec : specs) {
        for (std::uint64_t r = 0; r < 20; ++r) {
            auto eng = seeds.stream(StreamKind::Generic, r);
            const auto part = sample_partition(spec, eng);
            CHECK(part.size() == spec.leaf_count());
            CHECK_NOTHROW(part.validate(spec.dim == 1 ? probes1 : probes3));
        }
    }
}
