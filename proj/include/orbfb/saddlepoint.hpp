#pragma once

namespace orbfb {

// Limiting cumulant generating function of the normalized competing-codeword
// metric: K(theta) = integral_0^1 ln((1 + e^{theta x}) / 2) dx, together with
// its first two derivatives. Strictly convex, K'(0) = 1/4, K' increasing from
// 0 to 1/2. Everything here is the left-tail orientation; the flipped
// (right-tail) quantities are recovered through theta_d = -theta~_{-d},
// K(-t) = K(t) - t/2.
double cgf(double theta);
double cgf_d1(double theta);
double cgf_d2(double theta);

// Finite-n counterpart (1/n) sum_{i=1..n} ln((1 + e^{theta i/n}) / 2).
// Satisfies K_n = K + H/n + R_n with H(theta) = 0.5 ln((1+e^theta)/2) and
// |R_n| <= theta^2 / (48 n^2).
double finite_n_cgf(double theta, int n);

// The trapezoid boundary correction H(theta) above.
double cgf_boundary_correction(double theta);

struct SaddlepointSolution {
    double d;          // target mean, in (0, 1/4)
    double theta;      // root of K'(theta) = d, negative
    double k;          // K(theta)
    double kpp;        // K''(theta) > 0
    double rate;       // I(d) = theta*d - K(theta) >= 0
    double prefactor;  // A(d) = sqrt((1+e^theta) / (4 pi K''(theta) theta^2))
};

// Guard below which the left tail is astronomically small and double
// precision on e^{-n I(d)} becomes the binding constraint.
inline constexpr double kSaddlepointDMin = 1e-4;

// Solves K'(theta) = d by safeguarded Newton inside an expanding bracket.
// Requires d in [kSaddlepointDMin, 1/4); |K'(theta)-d| <= 1e-12 on return.
SaddlepointSolution solve_saddlepoint(double d);

// Unguarded variant for GMI/dispersion evaluation, where vanishing d is
// legitimate (high-SNR channels). Accepts any d in (0, 1/4); switches to the
// exponentially accurate closed form theta_d = -pi/sqrt(12 d) once the
// quadrature path stops mattering.
SaddlepointSolution solve_saddlepoint_any(double d);

struct RateDerivatives {
    double iprime;  // I'(d) = theta_d
    double ipp;     // I''(d) = 1 / K''(theta_d)
};

RateDerivatives rate_derivatives(const SaddlepointSolution& sol);

}  // namespace orbfb
