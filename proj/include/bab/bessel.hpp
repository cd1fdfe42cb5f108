#pragma once

#include <functional>

namespace bab::special {

// Adaptive 15-point Gauss-Kronrod quadrature with interval bisection.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-15,
                 double rel_tol = 1e-13, int max_depth = 60);

// exp(-x) * I_k(x), from (1/pi) * integral_0^pi cos(k phi) exp(x (cos phi - 1)) dphi, x >= 0.
double bessel_i_scaled(int k, double x);
double bessel_i(int k, double x);
double bessel_ratio(int k, double x);  // I_k(x) / I_0(x)

// Solves I_1(eta) / I_0(eta) = ratio for eta by bisection; ratio in [0, 1).
double solve_concentration(double ratio, double tol = 1e-10);

// Standard normal upper tail.
double q_function(double x);

}  // namespace bab::special
