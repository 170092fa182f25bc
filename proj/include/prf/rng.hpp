#pragma once

#include <cstdint>
#include <random>

namespace prf {

using Engine = std::mt19937_64;

// What a random stream is used for. Streams of different kinds never overlap.
enum class StreamKind : std::uint64_t {
    XPoints = 1,
    TreePartition = 2,
    ForestPartition = 3,
    HoldoutData = 4,
    Dataset = 5,
    Kernel = 6,
    Moments = 7,
    ForestCurve = 8,
    Generic = 9,
};

std::uint64_t mix64(std::uint64_t z);

// Deterministic seed hierarchy: a master seed split by (kind, index) into
// independent engines, so results never depend on the order work is scheduled.
class SeedSpec {
public:
    explicit SeedSpec(std::uint64_t master = 0) : master_(master) {}

    std::uint64_t master() const { return master_; }
    SeedSpec child(std::uint64_t tag) const;
    std::uint64_t seed_for(StreamKind kind, std::uint64_t index) const;
    Engine stream(StreamKind kind, std::uint64_t index) const;

private:
    std::uint64_t master_;
};

// Uniform on [0,1) with 53 random bits.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform on {0, ..., n-1}.
inline std::size_t uniform_index(Engine& eng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng);
}

double standard_normal(Engine& eng);

}  // namespace prf
