#pragma once

#include <cmath>
#include <cstddef>

#include "prf/errors.hpp"

namespace prf {

// Which x-region a bias integral covers: the whole cube, or [eps, 1-eps]^d.
struct BorderPolicy {
    enum class Mode { Full, Borderless };
    enum class Source { Toy, Purf, Custom };

    Mode mode = Mode::Full;
    Source source = Source::Toy;
    double custom_epsilon = 0.0;

    static BorderPolicy full() { return {}; }
    static BorderPolicy toy() { return {Mode::Borderless, Source::Toy, 0.0}; }
    static BorderPolicy purf() { return {Mode::Borderless, Source::Purf, 0.0}; }
    static BorderPolicy custom(double eps) { return {Mode::Borderless, Source::Custom, eps}; }

    bool borderless() const { return mode == Mode::Borderless; }

    // 1/k, 4 log(k)/k or the custom value; 0 in full mode.
    double epsilon(std::size_t k) const {
        if (mode == Mode::Full) return 0.0;
        double eps = custom_epsilon;
        if (source == Source::Toy) eps = 1.0 / static_cast<double>(k);
        if (source == Source::Purf) eps = 4.0 * std::log(static_cast<double>(k)) / static_cast<double>(k);
        if (!(eps >= 0.0 && eps < 0.5)) throw ParameterError("border width must lie in [0, 1/2)");
        return eps;
    }
};

}  // namespace prf
