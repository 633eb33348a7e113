#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace orbfb {

inline double gaussian_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double gaussian_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Gaussian tail Q(x) = Pr[N(0,1) > x]
inline double gaussian_tail(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

// Inverse of the Gaussian tail, |Q(Q^{-1}(p)) - p| <= 1e-14 relative.
// Rational initial guess (Acklam) polished by Newton steps on erfc.
inline double gaussian_tail_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("gaussian_tail_inv: p outside (0,1)");
    // invert for the lower-tail argument q = 1 - p, then negate
    const double q = p;
    double x;
    {
        static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
        static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
        static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
        const double plow = 0.02425;
        const double pp = 1.0 - q;  // lower-tail probability of the answer
        if (pp < plow) {
            const double r = std::sqrt(-2.0 * std::log(pp));
            x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
                ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
        } else if (pp <= 1.0 - plow) {
            const double u = pp - 0.5;
            const double r = u * u;
            x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
                (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
        } else {
            const double r = std::sqrt(-2.0 * std::log(1.0 - pp));
            x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
                ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
        }
    }
    // Newton polish on Q(x) = p; two steps reach full double precision
    for (int it = 0; it < 3; ++it) {
        const double err = gaussian_tail(x) - q;
        const double deriv = -gaussian_pdf(x);
        if (deriv == 0.0) break;
        const double step = err / deriv;
        x -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    return x;
}

}  // namespace orbfb
