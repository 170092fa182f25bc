#include <doctest.h>

#include <cstdlib>
#include <set>
#include <stdexcept>
#include <vector>

#include "prf/parallel.hpp"
#include "prf/rng.hpp"
#include "support/stats.hpp"

using namespace prf;

TEST_CASE("seed streams are reproducible and distinct per kind and index") {
    const SeedSpec seeds(42);
    auto a = seeds.stream(StreamKind::XPoints, 3);
    auto b = seeds.stream(StreamKind::XPoints, 3);
    CHECK(a() == b());
    std::set<std::uint64_t> firsts;
    for (auto kind : {StreamKind::XPoints, StreamKind::TreePartition, StreamKind::ForestPartition}) {
        for (std::uint64_t i = 0; i < 100; ++i) firsts.insert(seeds.stream(kind, i)());
    }
    CHECK(firsts.size() == 300);
    CHECK(SeedSpec(1).seed_for(StreamKind::Kernel, 0) != SeedSpec(2).seed_for(StreamKind::Kernel, 0));
    CHECK(seeds.child(1).master() != seeds.child(2).master());
}

TEST_CASE("neighbouring streams are uncorrelated") {
    const SeedSpec seeds(7);
    for (std::uint64_t i = 0; i < 5; ++i) {
        auto u = seeds.stream(StreamKind::Generic, i);
        auto v = seeds.stream(StreamKind::Generic, i + 1);
        prf::testing::MeanAccumulator prod;
        for (int r = 0; r < 20000; ++r) prod.add((uniform01(u) - 0.5) * (uniform01(v) - 0.5));
        CHECK(std::abs(prod.z(0.0)) < 4.0);
    }
}

TEST_CASE("uniform01 stays in the unit interval with the right mean") {
    Engine eng(5);
    prf::testing::MeanAccumulator acc;
    for (int i = 0; i < 100000; ++i) {
        const double u = uniform01(eng);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        acc.add(u);
    }
    CHECK(std::abs(acc.z(0.5)) < 4.0);
}

TEST_CASE("standard normal has unit variance") {
    Engine eng(11);
    prf::testing::MeanAccumulator sq;
    for (int i = 0; i < 100000; ++i) {
        const double z = standard_normal(eng);
        sq.add(z * z);
    }
    CHECK(std::abs(sq.z(1.0)) < 4.0);
}

TEST_CASE("parallel_for fills every slot and rethrows the lowest failing index") {
    std::vector<int> out(257, 0);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i) + 1; });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i) + 1);
    CHECK_THROWS_WITH(parallel_for(10,
                                   [](std::size_t i) {
                                       if (i == 3 || i == 7) throw std::runtime_error("task " + std::to_string(i));
                                   }),
                      "task 3");
}

TEST_CASE("pairwise sum matches the exact sum of integers") {
    std::vector<double> v(10001);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    CHECK(pairwise_sum(v.data(), v.size()) == 10000.0 * 10001.0 / 2.0);
    CHECK(pairwise_sum(v.data(), 0) == 0.0);
}

TEST_CASE("worker count honours the environment variable") {
    setenv(kThreadsEnv, "3", 1);
    CHECK(worker_count() == 3);
    unsetenv(kThreadsEnv);
    CHECK(worker_count() >= 1);
}
