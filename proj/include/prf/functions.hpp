#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prf/geometry.hpp"

namespace prf {

enum class FunctionKind { Sinusoidal, AbsoluteValue, Sum, Friedman1 };

std::string_view function_name(FunctionKind kind);
// Accepts sinusoidal | abs | sum | friedman1; throws ParameterError listing them otherwise.
FunctionKind parse_function(std::string_view name);

// Smoothness constants. Empty optionals mean the constant does not exist
// (e.g. C2 for |x - 1/2|) or has no closed form here.
struct Smoothness {
    double sup_norm = 0.0;                  // ||s||_inf
    double sup_grad = 0.0;                  // sup_x ||grad s(x)||_2, also the Lipschitz constant
    double sup_partial = 0.0;               // max_i sup_x |ds/dx_i|
    std::optional<double> sup_hessian;      // sup of the Hessian's spectral norm
    std::optional<double> sup_hessian_entry;  // max_{i,j} sup_x |d2s/dx_i dx_j|
    std::optional<double> sup_offdiag;      // max_{i!=j} sup_x |d2s/dx_i dx_j|
    std::optional<double> c2;               // second-order Taylor constant
    std::optional<double> c3;               // third-order Taylor constant
};

// Regression target on [0,1)^d.
class RegressionFn {
public:
    RegressionFn(FunctionKind kind, std::size_t dim);

    FunctionKind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    std::string_view name() const { return function_name(kind_); }
    const Smoothness& smoothness() const { return smooth_; }

    double eval(std::span<const double> x) const;
    // Average of s over a cell, computed exactly except for the Friedman1
    // sin(pi x1 x2) term (16-point Gauss-Legendre per axis).
    double cell_average(const CellView& cell) const;
    std::vector<double> gradient(std::span<const double> x) const;
    // Row-major d x d matrix of second derivatives.
    std::vector<double> hessian(std::span<const double> x) const;
    // Global mean over the unit cube.
    double global_mean() const;

    // One-dimensional helpers: integrals over [a, b] of s'(t)^2 and s''(t)^2.
    double integral_grad_sq(double a, double b) const;
    double integral_second_sq(double a, double b) const;

private:
    void check(std::span<const double> x) const;

    FunctionKind kind_;
    std::size_t dim_;
    Smoothness smooth_;
};

}  // namespace prf
