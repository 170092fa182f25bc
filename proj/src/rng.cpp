#include "prf/rng.hpp"

#include <cmath>

namespace prf {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SeedSpec SeedSpec::child(std::uint64_t tag) const {
    return SeedSpec(mix64(mix64(master_) ^ mix64(tag + 0x632be59bd9b4e019ULL)));
}

std::uint64_t SeedSpec::seed_for(StreamKind kind, std::uint64_t index) const {
    const auto k = static_cast<std::uint64_t>(kind);
    return mix64(mix64(master_ ^ mix64(k)) + index);
}

Engine SeedSpec::stream(StreamKind kind, std::uint64_t index) const {
    return Engine(seed_for(kind, index));
}

// Marsaglia polar method; written out so the value sequence does not depend
// on the standard library's normal_distribution.
double standard_normal(Engine& eng) {
    for (;;) {
        const double u = 2.0 * uniform01(eng) - 1.0;
        const double v = 2.0 * uniform01(eng) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

}  // namespace prf
