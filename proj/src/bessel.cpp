#include "bab/bessel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "bab/types.hpp"

namespace bab::special {

namespace {

constexpr std::array<double, 8> kXgk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void gk15(const std::function<double(double)>& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * kWgk[7];
    double rg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        rk += kWgk[j] * s;
        if (j % 2 == 1) rg += kWg[j / 2] * s;
    }
    result = rk * h;
    err = std::abs((rk - rg) * h);
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole, double err, double abs_tol,
             double rel_tol, int depth) {
    if (err <= std::max(abs_tol, rel_tol * std::abs(whole)) || depth <= 0) return whole;
    const double m = 0.5 * (a + b);
    double l, le, r, re;
    gk15(f, a, m, l, le);
    gk15(f, m, b, r, re);
    return adapt(f, a, m, l, le, 0.5 * abs_tol, rel_tol, depth - 1) +
           adapt(f, m, b, r, re, 0.5 * abs_tol, rel_tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, double rel_tol,
                 int max_depth) {
    double whole, err;
    gk15(f, a, b, whole, err);
    return adapt(f, a, b, whole, err, abs_tol, rel_tol, max_depth);
}

double bessel_i_scaled(int k, double x) {
    if (!(x >= 0.0)) throw std::domain_error("bessel_i: negative argument");
    // cos(phi) - 1 = -2 sin^2(phi/2) avoids cancellation near the peak at phi = 0.
    auto f = [k, x](double phi) {
        const double s = std::sin(0.5 * phi);
        return std::cos(k * phi) * std::exp(-2.0 * x * s * s);
    };
    // The integrand concentrates in a width ~1/sqrt(x) around 0; split there so the
    // adaptive pass sees the peak.
    double total = 0.0;
    const double w = x > 1.0 ? std::min(kPi, 12.0 / std::sqrt(x)) : kPi;
    total += integrate(f, 0.0, w, 1e-300, 1e-14);
    // The tail is negligible next to the peak; an absolute tolerance keeps the
    // bisection from chasing relative accuracy on an underflowing integrand.
    if (w < kPi) total += integrate(f, w, kPi, 1e-16 * std::abs(total), 1e-14);
    return total / kPi;
}

double bessel_i(int k, double x) { return std::exp(x) * bessel_i_scaled(k, x); }

double bessel_ratio(int k, double x) {
    if (x == 0.0) return k == 0 ? 1.0 : 0.0;
    return bessel_i_scaled(k, x) / bessel_i_scaled(0, x);
}

double solve_concentration(double ratio, double tol) {
    if (!(ratio >= 0.0) || !(ratio < 1.0)) throw std::domain_error("solve_concentration: ratio must be in [0, 1)");
    if (ratio == 0.0) return 0.0;
    double lo = 0.0;
    double hi = std::max(1.0, 1.0 / (1.0 - ratio));
    while (bessel_ratio(1, hi) < ratio) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double r = bessel_ratio(1, mid);
        if (std::abs(r - ratio) <= tol) return mid;
        if (r < ratio)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace bab::special
