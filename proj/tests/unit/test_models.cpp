#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "prf/errors.hpp"
#include "prf/models.hpp"
#include "support/stats.hpp"

using namespace prf;
using prf::testing::MeanAccumulator;

namespace {

std::vector<Cell> cells_of(const Partition& p) {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < p.size(); ++i) out.push_back(p.cell_copy(i));
    std::sort(out.begin(), out.end(), [](const Cell& a, const Cell& b) { return a.lower < b.lower; });
    return out;
}

// Fixed-x chain for the balanced model: at each level one coordinate is drawn
// and x's interval on it is cut at a uniform point, keeping the side with x.
FaceDistances bprf_chain(std::size_t p, std::span<const double> x, Engine& eng) {
    const std::size_t d = x.size();
    std::vector<double> lo(d, 0.0), hi(d, 1.0);
    for (std::size_t level = 0; level < p; ++level) {
        const std::size_t j = uniform_index(eng, d);
        const double t = lo[j] + uniform01(eng) * (hi[j] - lo[j]);
        if (x[j] >= t) {
            lo[j] = t;
        } else {
            hi[j] = t;
        }
    }
    FaceDistances fd{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t j = 0; j < d; ++j) {
        fd.alpha[j] = x[j] - lo[j];
        fd.beta[j] = hi[j] - x[j];
    }
    return fd;
}

double ks_uniform_statistic(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        dmax = std::max({dmax, (static_cast<double>(i) + 1.0) / n - v[i], v[i] - static_cast<double>(i) / n});
    }
    return dmax;
}

}  // namespace

TEST_CASE("model names parse and unknown names list the choices") {
    CHECK(parse_model("toy") == ModelKind::Toy);
    CHECK(parse_model("holdout") == ModelKind::Holdout);
    CHECK(model_name(ModelKind::Ubprf) == "ubprf");
    try {
        parse_model("forest");
        FAIL("expected an error");
    } catch (const ParameterError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("purf") != std::string::npos);
        CHECK(msg.find("midpoint") != std::string::npos);
    }
}

TEST_CASE("invalid model parameters are rejected") {
    CHECK_THROWS_AS((ModelSpec{ModelKind::Toy, 1, 1}.validate()), ParameterError);
    CHECK_THROWS_AS((ModelSpec{ModelKind::Toy, 4, 2}.validate()), ParameterError);
    CHECK_THROWS_AS((ModelSpec{ModelKind::Purf, 0, 1}.validate()), ParameterError);
    ModelSpec mid{ModelKind::Midpoint, 3, 2};
    mid.weights = {0.7, 0.2};
    CHECK_THROWS_AS(mid.validate(), ParameterError);
    mid.weights = {1.5, -0.5};
    CHECK_THROWS_AS(mid.validate(), ParameterError);
    ModelSpec ho{ModelKind::Holdout, 10, 3};
    ho.n_prime = 5;
    CHECK_THROWS_AS(ho.validate(), ParameterError);
    ho.n_prime = 0;
    ho.mtry = 4;
    CHECK_THROWS_AS(ho.validate(), ParameterError);
    CHECK_THROWS_AS(spec_for_k(ModelKind::Bprf, 48, 1), ParameterError);
    CHECK(spec_for_k(ModelKind::Bprf, 64, 2).k == 6);
    Engine eng(1);
    Partition out;
    CHECK_THROWS_AS(sample_toy(1, eng, out), ParameterError);
    CHECK_THROWS_AS(sample_purf(0, eng, out), ParameterError);
}

TEST_CASE("toy partition with a half shift") {
    Partition p;
    toy_partition(2, 0.5, p);
    const auto cells = cells_of(p);
    REQUIRE(cells.size() == 3);
    CHECK(cells[0].upper[0] == 0.25);
    CHECK(cells[1].lower[0] == 0.25);
    CHECK(cells[1].upper[0] == 0.75);
    CHECK(cells[2].upper[0] == 1.0);
}

TEST_CASE("toy interior cells have length exactly 1/k") {
    Engine eng(2);
    Partition p;
    for (int r = 0; r < 100; ++r) {
        sample_toy(10, eng, p);
        REQUIRE(p.size() == 11);
        const auto cells = cells_of(p);
        for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
            CHECK(cells[i].upper[0] - cells[i].lower[0] == doctest::Approx(0.1).epsilon(1e-12));
        }
    }
}

TEST_CASE("toy face product at the centre averages 1/(6k^2)") {
    const SeedSpec seeds(3);
    MeanAccumulator ab;
    Partition p;
    const double x[] = {0.5};
    for (std::uint64_t r = 0; r < 100000; ++r) {
        auto eng = seeds.stream(StreamKind::Generic, r);
        sample_toy(10, eng, p);
        const auto fd = p.cell_bounds_at(x);
        ab.add(fd.alpha[0] * fd.beta[0]);
    }
    CHECK(std::abs(ab.z(1.0 / 600.0)) < 4.0);
}

TEST_CASE("toy interior position within the cell is uniform") {
    Engine eng(4);
    Partition p;
    const double x[] = {0.37};
    std::vector<double> v;
    for (int r = 0; r < 10000; ++r) {
        sample_toy(16, eng, p);
        const auto fd = p.cell_bounds_at(x);
        CHECK(fd.alpha[0] + fd.beta[0] == doctest::Approx(1.0 / 16.0));
        v.push_back(16.0 * fd.beta[0]);
    }
    // 1.628 / sqrt(n) is the asymptotic 1% critical value.
    CHECK(ks_uniform_statistic(v) < 1.628 / std::sqrt(10000.0));
}

TEST_CASE("purf breakpoints are sorted and the one-split law is symmetric") {
    Engine eng(5);
    Partition p;
    MeanAccumulator left;
    for (int r = 0; r < 20000; ++r) {
        sample_purf(1, eng, p);
        REQUIRE(p.size() == 2);
        left.add(cells_of(p)[0].volume());
    }
    CHECK(std::abs(left.z(0.5)) < 4.0);
    sample_purf(50, eng, p);
    const auto cells = cells_of(p);
    for (std::size_t i = 1; i < cells.size(); ++i) CHECK(cells[i].lower[0] == cells[i - 1].upper[0]);
}

TEST_CASE("purf face moments at the centre for two splits") {
    const SeedSpec seeds(6);
    MeanAccumulator diff, prod;
    Partition p;
    const double x[] = {0.5};
    for (std::uint64_t r = 0; r < 100000; ++r) {
        auto eng = seeds.stream(StreamKind::Generic, r);
        sample_purf(2, eng, p);
        const auto fd = p.cell_bounds_at(x);
        diff.add(fd.alpha[0] - fd.beta[0]);
        prod.add(fd.alpha[0] * fd.beta[0]);
    }
    CHECK(std::abs(diff.z(0.0)) < 4.0);
    CHECK(std::abs(prod.z(0.0729166666666667)) < 4.0);
}

TEST_CASE("balanced model: leaf count, depth-zero cube, product moments") {
    Engine eng(7);
    Partition p;
    sample_bprf(0, 3, eng, p);
    CHECK(p.size() == 1);
    CHECK(p.cell(0).volume() == 1.0);
    sample_bprf(6, 2, eng, p);
    CHECK(p.size() == 64);

    const SeedSpec seeds(8);
    MeanAccumulator prod, cross;
    const double x1[] = {0.5};
    const double x2[] = {0.0, 0.0};
    for (std::uint64_t r = 0; r < 100000; ++r) {
        auto e = seeds.stream(StreamKind::Generic, r);
        sample_bprf(3, 1, e, p);
        const auto fd = p.cell_bounds_at(x1);
        prod.add(fd.alpha[0] * fd.beta[0]);
        sample_bprf(1, 2, e, p);
        const auto g = p.cell_bounds_at(x2);
        cross.add((g.alpha[0] - g.beta[0]) * (g.alpha[1] - g.beta[1]));
    }
    CHECK(std::abs(prod.z(0.03125)) < 4.0);
    CHECK(std::abs(cross.z(0.5)) < 4.0);
}

TEST_CASE("balanced sampler and the fixed-x chain agree on face moments") {
    const SeedSpec seeds(9);
    const double x[] = {0.3, 0.8};
    MeanAccumulator s_a, s_b, s_ab, s_a2, c_a, c_b, c_ab, c_a2;
    Partition p;
    for (std::uint64_t r = 0; r < 50000; ++r) {
        auto e1 = seeds.stream(StreamKind::Generic, r);
        sample_bprf(4, 2, e1, p);
        const auto fd = p.cell_bounds_at(x);
        auto e2 = seeds.stream(StreamKind::Moments, r);
        const auto ch = bprf_chain(4, x, e2);
        s_a.add(fd.alpha[0]);
        s_b.add(fd.beta[1]);
        s_ab.add(fd.alpha[0] * fd.beta[0]);
        s_a2.add(fd.alpha[1] * fd.alpha[1]);
        c_a.add(ch.alpha[0]);
        c_b.add(ch.beta[1]);
        c_ab.add(ch.alpha[0] * ch.beta[0]);
        c_a2.add(ch.alpha[1] * ch.alpha[1]);
    }
    auto joint_z = [](const MeanAccumulator& u, const MeanAccumulator& v) {
        return (u.mean() - v.mean()) / std::hypot(u.se(), v.se());
    };
    CHECK(std::abs(joint_z(s_a, c_a)) < 4.0);
    CHECK(std::abs(joint_z(s_b, c_b)) < 4.0);
    CHECK(std::abs(joint_z(s_ab, c_ab)) < 4.0);
    CHECK(std::abs(joint_z(s_a2, c_a2)) < 4.0);
}

TEST_CASE("unbalanced model: sizes and the single-split law") {
    Engine eng(10);
    Partition p;
    sample_ubprf(0, 2, eng, p);
    CHECK(p.size() == 1);
    for (int r = 0; r < 100; ++r) {
        sample_ubprf(3, 2, eng, p);
        CHECK(p.size() == 4);
        double total = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) total += p.cell(i).volume();
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    MeanAccumulator left, left_sq;
    for (int r = 0; r < 20000; ++r) {
        sample_ubprf(1, 1, eng, p);
        const double v = cells_of(p)[0].volume();
        left.add(v);
        left_sq.add(v * v);
    }
    CHECK(std::abs(left.z(0.5)) < 4.0);
    CHECK(std::abs(left_sq.z(1.0 / 3.0)) < 4.0);
}

TEST_CASE("midpoint model: deterministic grids and dyadic sides") {
    Engine eng(11);
    Partition p;
    sample_midpoint(2, 1, {1.0}, eng, p);
    const auto cells = cells_of(p);
    REQUIRE(cells.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(cells[i].lower[0] == 0.25 * static_cast<double>(i));
        CHECK(cells[i].upper[0] == 0.25 * static_cast<double>(i + 1));
    }
    sample_midpoint(1, 2, {1.0, 0.0}, eng, p);
    const auto halves = cells_of(p);
    REQUIRE(halves.size() == 2);
    CHECK(halves[0].upper[0] == 0.5);
    CHECK(halves[0].upper[1] == 1.0);
    for (int r = 0; r < 50; ++r) {
        sample_midpoint(4, 2, {0.5, 0.5}, eng, p);
        CHECK(p.size() == 16);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto c = p.cell_copy(i);
            for (std::size_t j = 0; j < 2; ++j) {
                const double m = -std::log2(c.upper[j] - c.lower[j]);
                CHECK(m == std::round(m));
                CHECK(m >= 0.0);
                CHECK(m <= 4.0);
            }
        }
    }
}

TEST_CASE("hold-out trees: one leaf, the single midpoint split, and data checks") {
    Dataset two{1, {0.1, 0.9}, {0.0, 1.0}, 0.0};
    Engine eng(12);
    Partition p;
    sample_holdout(1, two, 1, eng, p);
    CHECK(p.size() == 1);
    sample_holdout(2, two, 1, eng, p);
    const auto cells = cells_of(p);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].upper[0] == 0.5);
    CHECK(cells[1].lower[0] == 0.5);
    CHECK_THROWS_AS(sample_holdout(3, two, 1, eng, p), ParameterError);
    CHECK_THROWS_AS(sample_holdout(2, two, 2, eng, p), ParameterError);
}

TEST_CASE("hold-out trees stop when no leaf can be split") {
    Dataset tied{1, {0.2, 0.2, 0.7, 0.7}, {0.0, 1.0, 2.0, 3.0}, 0.0};
    Engine eng(13);
    Partition p;
    sample_holdout(4, tied, 1, eng, p);
    CHECK(p.size() == 2);
}

TEST_CASE("hold-out trees are reproducible given the sample and the stream") {
    Dataset data{2, {}, {}, 0.0};
    Engine gen(14);
    for (int i = 0; i < 200; ++i) {
        const double a = uniform01(gen), b = uniform01(gen);
        data.xs.insert(data.xs.end(), {a, b});
        data.ys.push_back(a + b * b + 0.1 * standard_normal(gen));
    }
    Partition p1, p2;
    Engine e1(99), e2(99);
    sample_holdout(16, data, 1, e1, p1);
    sample_holdout(16, data, 1, e2, p2);
    REQUIRE(p1.size() == 16);
    REQUIRE(p2.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(p1.cell_copy(i).lower == p2.cell_copy(i).lower);
        CHECK(p1.cell_copy(i).upper == p2.cell_copy(i).upper);
    }
}
