#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace orbfb {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;       // estimated absolute error
    std::size_t evals = 0;
    bool converged = false;
};

struct QuadOptions {
    double abs_tol = 1e-10;
    std::size_t max_evals = 1'000'000;
    int initial_panels = 8;  // uniform subdivision between breakpoints before
                             // refinement; guards against features narrower
                             // than the first rule application can see
};

// Adaptive bisection of a 15-point Gauss-Kronrod rule. Panels are split
// until the embedded error estimate meets abs_tol or the budget runs out.
QuadResult adaptive_quad(const std::function<double(double)>& f, double lo, double hi,
                         const QuadOptions& opt = {});

// Same, with interior breakpoints forced to be panel boundaries (kinks,
// density discontinuities, LLR sign changes).
QuadResult adaptive_quad(const std::function<double(double)>& f, double lo, double hi,
                         std::span<const double> breakpoints, const QuadOptions& opt = {});

// Throwing convenience wrapper: returns the value or reports non-convergence.
double integrate_or_throw(const std::function<double(double)>& f, double lo, double hi,
                          std::span<const double> breakpoints, const QuadOptions& opt = {});

// Nodes/weights of the N-point Gauss-Legendre rule on [-1,1], computed once
// via Newton iteration and cached. Used for fixed-cost smooth integrands.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int n);

// Composite fixed Gauss-Legendre over `panels` equal panels of [lo, hi].
double composite_gl(const std::function<double(double)>& f, double lo, double hi,
                    int panels, int order = 24);

}  // namespace orbfb
