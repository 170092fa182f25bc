#include "prf/functions.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "prf/errors.hpp"

namespace prf {

namespace {

using std::numbers::pi;
using Gauss16 = boost::math::quadrature::gauss<double, 16>;

constexpr std::array<std::pair<FunctionKind, std::string_view>, 4> kFunctionNames{{
    {FunctionKind::Sinusoidal, "sinusoidal"},
    {FunctionKind::AbsoluteValue, "abs"},
    {FunctionKind::Sum, "sum"},
    {FunctionKind::Friedman1, "friedman1"},
}};

// Spectral norm of the (x1, x2) Hessian block of sin(pi x1 x2).
double friedman_block_norm(double x1, double x2) {
    const double u = pi * x1 * x2;
    const double s = std::sin(u), c = std::cos(u);
    const double a = -pi * pi * x2 * x2 * s;
    const double d = -pi * pi * x1 * x1 * s;
    const double b = pi * c - pi * pi * x1 * x2 * s;
    return std::abs(0.5 * (a + d)) + std::sqrt(0.25 * (a - d) * (a - d) + b * b);
}

// Grid search with local refinement over [0,1]^2.
double friedman_block_sup() {
    static const double value = [] {
        double best = 0.0, bx = 0.0, by = 0.0;
        const int n = 400;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) {
                const double x = i / double(n), y = j / double(n);
                const double v = friedman_block_norm(x, y);
                if (v > best) best = v, bx = x, by = y;
            }
        }
        double h = 1.0 / n;
        for (int round = 0; round < 40; ++round) {
            for (int i = -4; i <= 4; ++i) {
                for (int j = -4; j <= 4; ++j) {
                    const double x = std::clamp(bx + i * h / 4, 0.0, 1.0);
                    const double y = std::clamp(by + j * h / 4, 0.0, 1.0);
                    const double v = friedman_block_norm(x, y);
                    if (v > best) best = v, bx = x, by = y;
                }
            }
            h /= 2;
        }
        return best;
    }();
    return value;
}

// sup over [0,1]^2 of |pi cos(u) - pi^2 x1 x2 sin(u)|, u = pi x1 x2. The
// expression depends on u only and u ranges over [0, pi].
double friedman_offdiag_sup() {
    double best = 0.0;
    const int n = 200000;
    for (int i = 0; i <= n; ++i) {
        const double u = pi * i / n;
        best = std::max(best, std::abs(pi * std::cos(u) - pi * u * std::sin(u)));
    }
    return best;
}

// sin(pi (a+b)) * sinc(pi (b-a)): mean of sin(2 pi t) on [a,b) without cancellation.
double sinusoid_average(double a, double b) {
    const double h = pi * (b - a);
    const double sinc = h < 1e-4 ? 1.0 - h * h / 6.0 + h * h * h * h / 120.0 : std::sin(h) / h;
    return std::sin(pi * (a + b)) * sinc;
}

double abs_average(double a, double b) {
    if (b <= 0.5) return 0.5 - 0.5 * (a + b);
    if (a >= 0.5) return 0.5 * (a + b) - 0.5;
    const double l = 0.5 - a, r = b - 0.5;
    return 0.5 * (l * l + r * r) / (b - a);
}

// Mean of (t - 1/2)^2 on [a,b).
double centered_square_average(double a, double b) {
    const double u = a - 0.5, v = b - 0.5;
    return (u * u + u * v + v * v) / 3.0;
}

}  // namespace

std::string_view function_name(FunctionKind kind) {
    for (const auto& [k, name] : kFunctionNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

FunctionKind parse_function(std::string_view name) {
    for (const auto& [k, n] : kFunctionNames) {
        if (n == name) return k;
    }
    std::ostringstream os;
    os << "unknown function '" << name << "'; valid choices:";
    for (const auto& entry : kFunctionNames) os << ' ' << entry.second;
    throw ParameterError(os.str());
}

RegressionFn::RegressionFn(FunctionKind kind, std::size_t dim) : kind_(kind), dim_(dim) {
    switch (kind) {
        case FunctionKind::Sinusoidal:
            if (dim != 1) throw ParameterError("sinusoidal requires d = 1");
            smooth_.sup_norm = 1.0;
            smooth_.sup_grad = 2 * pi;
            smooth_.sup_partial = 2 * pi;
            smooth_.sup_hessian = 4 * pi * pi;
            smooth_.sup_hessian_entry = 4 * pi * pi;
            smooth_.sup_offdiag = 0.0;
            smooth_.c2 = 2 * pi * pi;
            smooth_.c3 = 8 * pi * pi * pi / 6.0;
            break;
        case FunctionKind::AbsoluteValue:
            if (dim != 1) throw ParameterError("abs requires d = 1");
            smooth_.sup_norm = 0.5;
            smooth_.sup_grad = 1.0;
            smooth_.sup_partial = 1.0;
            break;
        case FunctionKind::Sum:
            if (dim < 1) throw ParameterError("sum requires d >= 1");
            smooth_.sup_norm = static_cast<double>(dim);
            smooth_.sup_grad = std::sqrt(static_cast<double>(dim));
            smooth_.sup_partial = 1.0;
            smooth_.sup_hessian = 0.0;
            smooth_.sup_hessian_entry = 0.0;
            smooth_.sup_offdiag = 0.0;
            smooth_.c2 = 0.0;
            smooth_.c3 = 0.0;
            break;
        case FunctionKind::Friedman1: {
            if (dim < 5) throw ParameterError("friedman1 requires d >= 5");
            smooth_.sup_norm = 3.0;
            // |grad|^2 <= pi^2 (x1^2 + x2^2) + 4 + 1 + 1/4, maximised at the corner.
            smooth_.sup_grad = std::sqrt(2 * pi * pi + 4.0 + 1.25);
            smooth_.sup_partial = pi;
            const double h = std::max(4.0, friedman_block_sup());
            smooth_.sup_hessian = h;
            smooth_.sup_offdiag = friedman_offdiag_sup();
            smooth_.sup_hessian_entry = std::max({4.0, pi * pi, *smooth_.sup_offdiag});
            smooth_.c2 = h / 2.0;
            break;
        }
    }
}

void RegressionFn::check(std::span<const double> x) const {
    if (x.size() != dim_) {
        std::ostringstream os;
        os << function_name(kind_) << ": point has dimension " << x.size() << ", expected " << dim_;
        throw DomainError(os.str());
    }
}

double RegressionFn::eval(std::span<const double> x) const {
    check(x);
    switch (kind_) {
        case FunctionKind::Sinusoidal:
            return std::sin(2 * pi * x[0]);
        case FunctionKind::AbsoluteValue:
            return std::abs(x[0] - 0.5);
        case FunctionKind::Sum: {
            double s = 0.0;
            for (double v : x) s += v;
            return s;
        }
        case FunctionKind::Friedman1:
            return 0.1 * (10 * std::sin(pi * x[0] * x[1]) + 20 * (x[2] - 0.5) * (x[2] - 0.5) + 10 * x[3] +
                          5 * x[4]);
    }
    return 0.0;
}

double RegressionFn::cell_average(const CellView& cell) const {
    if (cell.dim() != dim_) throw DomainError("cell dimension does not match the function");
    const auto& a = cell.lower;
    const auto& b = cell.upper;
    switch (kind_) {
        case FunctionKind::Sinusoidal:
            return sinusoid_average(a[0], b[0]);
        case FunctionKind::AbsoluteValue:
            return abs_average(a[0], b[0]);
        case FunctionKind::Sum: {
            double s = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) s += 0.5 * (a[i] + b[i]);
            return s;
        }
        case FunctionKind::Friedman1: {
            const double area = (b[0] - a[0]) * (b[1] - a[1]);
            const double sin_term = Gauss16::integrate(
                [&](double u) {
                    return Gauss16::integrate([u](double v) { return std::sin(pi * u * v); }, a[1], b[1]);
                },
                a[0], b[0]);
            return sin_term / area + 2.0 * centered_square_average(a[2], b[2]) + 0.5 * (a[3] + b[3]) +
                   0.25 * (a[4] + b[4]);
        }
    }
    return 0.0;
}

std::vector<double> RegressionFn::gradient(std::span<const double> x) const {
    check(x);
    std::vector<double> g(dim_, 0.0);
    switch (kind_) {
        case FunctionKind::Sinusoidal:
            g[0] = 2 * pi * std::cos(2 * pi * x[0]);
            break;
        case FunctionKind::AbsoluteValue:
            if (x[0] == 0.5) throw DomainError("abs: not differentiable here (x = 1/2)");
            g[0] = x[0] > 0.5 ? 1.0 : -1.0;
            break;
        case FunctionKind::Sum:
            std::fill(g.begin(), g.end(), 1.0);
            break;
        case FunctionKind::Friedman1: {
            const double c = std::cos(pi * x[0] * x[1]);
            g[0] = pi * x[1] * c;
            g[1] = pi * x[0] * c;
            g[2] = 4.0 * (x[2] - 0.5);
            g[3] = 1.0;
            g[4] = 0.5;
            break;
        }
    }
    return g;
}

std::vector<double> RegressionFn::hessian(std::span<const double> x) const {
    check(x);
    std::vector<double> h(dim_ * dim_, 0.0);
    switch (kind_) {
        case FunctionKind::Sinusoidal:
            h[0] = -4 * pi * pi * std::sin(2 * pi * x[0]);
            break;
        case FunctionKind::AbsoluteValue:
            if (x[0] == 0.5) throw DomainError("abs: not differentiable here (x = 1/2)");
            break;
        case FunctionKind::Sum:
            break;
        case FunctionKind::Friedman1: {
            const double u = pi * x[0] * x[1];
            const double s = std::sin(u), c = std::cos(u);
            h[0] = -pi * pi * x[1] * x[1] * s;
            h[dim_ + 1] = -pi * pi * x[0] * x[0] * s;
            h[1] = h[dim_] = pi * c - pi * pi * x[0] * x[1] * s;
            h[2 * dim_ + 2] = 4.0;
            break;
        }
    }
    return h;
}

double RegressionFn::global_mean() const {
    std::vector<double> lo(dim_, 0.0), hi(dim_, 1.0);
    return cell_average(CellView{lo, hi});
}

double RegressionFn::integral_grad_sq(double a, double b) const {
    if (dim_ != 1) throw UnsupportedError("integral_grad_sq is one-dimensional");
    auto f = [this](double t) {
        if (kind_ == FunctionKind::AbsoluteValue) return 1.0;
        const double g = gradient(std::span<const double>(&t, 1))[0];
        return g * g;
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

double RegressionFn::integral_second_sq(double a, double b) const {
    if (dim_ != 1) throw UnsupportedError("integral_second_sq is one-dimensional");
    if (!smooth_.c2) throw UnsupportedError(std::string(name()) + ": second derivative unavailable");
    auto f = [this](double t) {
        const double h = hessian(std::span<const double>(&t, 1))[0];
        return h * h;
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace prf
