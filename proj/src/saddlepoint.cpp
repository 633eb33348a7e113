#include "orbfb/saddlepoint.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "orbfb/quadrature.hpp"

namespace orbfb {
namespace {

constexpr double kThetaCap = 700.0;  // |theta| beyond this: asymptotic forms
constexpr double kPi2Over12 = std::numbers::pi * std::numbers::pi / 12.0;

// ln((1 + e^t)/2) without overflow
double log_half_1p_exp(double t) {
    if (t > 0.0) return t - std::numbers::ln2 + std::log1p(std::exp(-t));
    return -std::numbers::ln2 + std::log1p(std::exp(t));
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// Integrands vary on the x-scale 1/|theta|; panel widths are chosen so a
// 24-point rule resolves each panel to well under 1e-13.
int panels_for(double theta) {
    return 4 + static_cast<int>(std::ceil(std::abs(theta) / 6.0));
}

}  // namespace

double cgf(double theta) {
    if (theta == 0.0) return 0.0;
    if (theta > kThetaCap) return 0.5 * theta - std::numbers::ln2 + kPi2Over12 / theta;
    if (theta < -kThetaCap) return -std::numbers::ln2 + kPi2Over12 / (-theta);
    return composite_gl([theta](double x) { return log_half_1p_exp(theta * x); }, 0.0, 1.0,
                        panels_for(theta));
}

double cgf_d1(double theta) {
    if (theta == 0.0) return 0.25;
    if (theta > kThetaCap) return 0.5 - kPi2Over12 / (theta * theta);
    if (theta < -kThetaCap) return kPi2Over12 / (theta * theta);
    return composite_gl([theta](double x) { return x * sigmoid(theta * x); }, 0.0, 1.0,
                        panels_for(theta));
}

double cgf_d2(double theta) {
    if (theta == 0.0) return 1.0 / 12.0;
    if (std::abs(theta) > kThetaCap) {
        const double a = std::abs(theta);
        return 2.0 * kPi2Over12 / (a * a * a);
    }
    return composite_gl(
        [theta](double x) {
            const double s = sigmoid(theta * x);
            return x * x * s * (1.0 - s);
        },
        0.0, 1.0, panels_for(theta));
}

double finite_n_cgf(double theta, int n) {
    if (n < 1) throw std::domain_error("finite_n_cgf: n must be >= 1");
    double sum = 0.0;
    for (int i = 1; i <= n; ++i) sum += log_half_1p_exp(theta * i / n);
    return sum / n;
}

double cgf_boundary_correction(double theta) { return 0.5 * log_half_1p_exp(theta); }

namespace {

SaddlepointSolution bundle_for(double d, double theta) {
    SaddlepointSolution sol;
    sol.d = d;
    sol.theta = theta;
    sol.k = cgf(theta);
    sol.kpp = cgf_d2(theta);
    sol.rate = theta * d - sol.k;
    sol.prefactor = std::sqrt((1.0 + std::exp(theta)) /
                              (4.0 * std::numbers::pi * sol.kpp * theta * theta));
    return sol;
}

}  // namespace

SaddlepointSolution solve_saddlepoint_any(double d) {
    if (!(d > 0.0 && d < 0.25))
        throw std::domain_error("solve_saddlepoint: d must lie in (0, 1/4); got d=" +
                                std::to_string(d));

    // In the deep tail K'(theta) = pi^2/(12 theta^2) up to a relative error
    // of order e^{theta}, so the inverse is closed-form there.
    const double theta_deep = -std::numbers::pi / std::sqrt(12.0 * d);
    if (theta_deep < -40.0) return bundle_for(d, theta_deep);

    // K' is strictly increasing with K'(0) = 1/4, so the root is negative.
    // Expand the bracket left until K'(lo) < d.
    double lo = -1.0, hi = 0.0;
    while (cgf_d1(lo) > d) {
        hi = lo;
        lo *= 2.0;
        if (lo < -1e6)
            throw std::runtime_error("solve_saddlepoint: bracket expansion failed, last bracket [" +
                                     std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }

    // Newton with bisection fallback whenever the step leaves the bracket.
    double theta = 0.5 * (lo + hi);
    // near d = 1/4 the local expansion K'(t) ~ 1/4 + t/12 gives a sharp start
    if (d > 0.2) theta = std::max(lo, 12.0 * (d - 0.25));
    for (int it = 0; it < 200; ++it) {
        const double g = cgf_d1(theta) - d;
        if (std::abs(g) <= 1e-12) break;
        if (g > 0.0) hi = theta; else lo = theta;
        const double step = g / cgf_d2(theta);
        double next = theta - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        theta = next;
    }
    return bundle_for(d, theta);
}

SaddlepointSolution solve_saddlepoint(double d) {
    if (!(d >= kSaddlepointDMin && d < 0.25))
        throw std::domain_error("solve_saddlepoint: d must lie in [1e-4, 1/4); got d=" +
                                std::to_string(d));
    return solve_saddlepoint_any(d);
}

RateDerivatives rate_derivatives(const SaddlepointSolution& sol) {
    return {sol.theta, 1.0 / sol.kpp};
}

}  // namespace orbfb
