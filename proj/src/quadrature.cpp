#include "orbfb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace orbfb {
namespace {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule (QUADPACK).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
    double integral;
    double error;
};

PanelEstimate gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int j = 0; j < 7; ++j) {
        fv[j] = f(c - h * kXgk[j]);
        fv[14 - j] = f(c + h * kXgk[j]);
    }
    fv[7] = f(c);
    double res_k = kWgk[7] * fv[7];
    double res_g = kWg[3] * fv[7];
    for (int j = 0; j < 7; ++j) {
        res_k += kWgk[j] * (fv[j] + fv[14 - j]);
        if (j % 2 == 1) res_g += kWg[j / 2] * (fv[j] + fv[14 - j]);
    }
    return {res_k * h, std::abs((res_k - res_g) * h)};
}

struct Item {
    double error;
    double a, b, integral;
    bool operator<(const Item& o) const { return error < o.error; }
};

}  // namespace

QuadResult adaptive_quad(const std::function<double(double)>& f, double lo, double hi,
                         std::span<const double> breakpoints, const QuadOptions& opt) {
    std::vector<double> knots{lo, hi};
    for (double b : breakpoints)
        if (b > lo && b < hi) knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    std::vector<double> edges;
    const int sub = std::max(1, opt.initial_panels);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        for (int j = 0; j < sub; ++j)
            edges.push_back(knots[i] + (knots[i + 1] - knots[i]) * j / sub);
    }
    edges.push_back(hi);

    std::priority_queue<Item> heap;
    QuadResult out;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (edges[i + 1] <= edges[i]) continue;
        auto est = gk15(f, edges[i], edges[i + 1]);
        out.evals += 15;
        heap.push({est.error, edges[i], edges[i + 1], est.integral});
        total += est.integral;
        total_err += est.error;
    }
    while (total_err > opt.abs_tol && out.evals + 30 <= opt.max_evals) {
        Item worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // panel narrowed to machine resolution; accept its estimate
            total_err -= worst.error;
            heap.push({0.0, worst.a, worst.b, worst.integral});
            continue;
        }
        auto left = gk15(f, worst.a, mid);
        auto right = gk15(f, mid, worst.b);
        out.evals += 30;
        total += left.integral + right.integral - worst.integral;
        total_err += left.error + right.error - worst.error;
        heap.push({left.error, worst.a, mid, left.integral});
        heap.push({right.error, mid, worst.b, right.integral});
    }
    out.value = total;
    out.error = total_err;
    out.converged = total_err <= opt.abs_tol;
    return out;
}

QuadResult adaptive_quad(const std::function<double(double)>& f, double lo, double hi,
                         const QuadOptions& opt) {
    return adaptive_quad(f, lo, hi, std::span<const double>{}, opt);
}

double integrate_or_throw(const std::function<double(double)>& f, double lo, double hi,
                          std::span<const double> breakpoints, const QuadOptions& opt) {
    QuadResult r = adaptive_quad(f, lo, hi, breakpoints, opt);
    if (!r.converged)
        throw std::runtime_error("quadrature budget exceeded: error estimate " +
                                 std::to_string(r.error) + " after " + std::to_string(r.evals) +
                                 " evaluations");
    return r.value;
}

const GaussLegendre& gauss_legendre(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mtx;
    std::lock_guard lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev initial guess, Newton on P_n
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it2 = 0; it2 < 100; ++it2) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(gl)).first->second;
}

double composite_gl(const std::function<double(double)>& f, double lo, double hi,
                    int panels, int order) {
    const GaussLegendre& gl = gauss_legendre(order);
    const double h = (hi - lo) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * h;
        const double c = a + 0.5 * h;
        double acc = 0.0;
        for (int j = 0; j < order; ++j) acc += gl.weights[j] * f(c + 0.5 * h * gl.nodes[j]);
        sum += 0.5 * h * acc;
    }
    return sum;
}

}  // namespace orbfb
