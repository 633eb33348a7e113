#include "orbfb/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "orbfb/gauss.hpp"
#include "orbfb/quadrature.hpp"
#include "orbfb/saddlepoint.hpp"

namespace orbfb {
namespace {

constexpr double kLlrCap = 1400.0;
constexpr QuadOptions kChannelQuad{1e-10, 1'000'000};

double output_density(const BinaryInputChannel& ch, double y) {
    return 0.5 * (ch.q_plus(y) + ch.q_minus(y));
}

// min posterior mass density: p_Y(y) Pr[E=1|Y=y] = min(q+,q-)/2
double min_half(const BinaryInputChannel& ch, double y) {
    return 0.5 * std::min(ch.q_plus(y), ch.q_minus(y));
}

// solutions of |llr(y)| = level, located by a sign scan plus bisection;
// passed to the quadrature as panel boundaries so indicator integrands are
// never invisible to the rule
std::vector<double> level_crossings(const BinaryInputChannel& ch, double level,
                                    std::vector<double> seed) {
    const Interval s = ch.integration_support();
    auto f = [&](double y) { return std::abs(ch.llr(y)) - level; };
    constexpr int kGrid = 2048;
    double y0 = s.lo;
    double f0 = f(y0);
    for (int i = 1; i <= kGrid; ++i) {
        const double y1 = s.lo + (s.hi - s.lo) * i / kGrid;
        const double f1 = f(y1);
        if ((f0 <= 0.0) != (f1 <= 0.0)) {
            double a = y0, b = y1, fa = f0;
            for (int it = 0; it < 90 && b - a > 0.0; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = f(m);
                if ((fa <= 0.0) != (fm <= 0.0)) {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            seed.push_back(0.5 * (a + b));
        }
        y0 = y1;
        f0 = f1;
    }
    return seed;
}

bool is_degenerate(const BinaryInputChannel& ch) {
    const Interval s = ch.integration_support();
    const auto breaks = ch.breakpoints();
    const double tv = adaptive_quad(
                          [&](double y) { return std::abs(ch.q_plus(y) - ch.q_minus(y)); },
                          s.lo, s.hi, breaks, kChannelQuad)
                          .value;
    return tv < 1e-12;
}

}  // namespace

double BinaryInputChannel::llr(double y) const {
    const double qp = q_plus(y), qm = q_minus(y);
    if (qp <= 0.0 && qm <= 0.0) return 0.0;
    if (qm <= 0.0) return kLlrCap;
    if (qp <= 0.0) return -kLlrCap;
    return std::clamp(std::log(qp / qm), -kLlrCap, kLlrCap);
}

double BinaryInputChannel::reliability_cdf(double t) const {
    const Interval s = integration_support();
    const auto breaks = level_crossings(*this, t, breakpoints());
    return std::clamp(integrate_or_throw(
                          [&](double y) {
                              return std::abs(llr(y)) <= t ? output_density(*this, y) : 0.0;
                          },
                          s.lo, s.hi, breaks, kChannelQuad),
                      0.0, 1.0);
}

double BinaryInputChannel::error_reliability_tail(double lambda) const {
    const Interval s = integration_support();
    const auto breaks = level_crossings(*this, lambda, breakpoints());
    return std::clamp(integrate_or_throw(
                          [&](double y) {
                              return std::abs(llr(y)) >= lambda ? min_half(*this, y) : 0.0;
                          },
                          s.lo, s.hi, breaks, kChannelQuad),
                      0.0, 0.5);
}

BpskAwgnChannel::BpskAwgnChannel(double snr_db)
    : snr_db_(snr_db),
      sigma_sq_(std::pow(10.0, -snr_db / 10.0)),
      sigma_(std::sqrt(sigma_sq_)) {}

double BpskAwgnChannel::q_plus(double y) const { return gaussian_pdf((y - 1.0) / sigma_) / sigma_; }
double BpskAwgnChannel::q_minus(double y) const { return gaussian_pdf((y + 1.0) / sigma_) / sigma_; }

Interval BpskAwgnChannel::integration_support() const {
    return {-1.0 - 8.5 * sigma_, 1.0 + 8.5 * sigma_};
}

double BpskAwgnChannel::reliability_cdf(double t) const {
    if (t < 0.0) return 0.0;
    // |LLR| <= t  <=>  |Y| <= u with u = t sigma^2 / 2; |Y| has the same law
    // under either input by symmetry, so condition on X = +1.
    const double u = t * sigma_sq_ / 2.0;
    return std::max(0.0, gaussian_cdf((u - 1.0) / sigma_) - gaussian_cdf((-u - 1.0) / sigma_));
}

double BpskAwgnChannel::error_reliability_tail(double lambda) const {
    // integral of min(q+,q-)/2 over |y| >= u; both half-lines contribute
    // Q((u+1)/sigma) / 2 each.
    const double u = std::max(0.0, lambda) * sigma_sq_ / 2.0;
    return gaussian_tail((u + 1.0) / sigma_);
}

GenericChannel::GenericChannel(Density q_plus, Density q_minus, Interval support,
                               std::vector<double> breakpoints, Sampler sampler)
    : qp_(std::move(q_plus)),
      qm_(std::move(q_minus)),
      support_(support),
      breaks_(std::move(breakpoints)),
      sampler_(std::move(sampler)) {}

double GenericChannel::sample(int x, Rng& rng) const {
    if (!sampler_) throw std::logic_error("GenericChannel: no sampler provided");
    return sampler_(x, rng);
}

double psi(const BinaryInputChannel& ch, double t) {
    if (t < 0.0) throw std::domain_error("psi: reliability must be >= 0");
    return ch.reliability_cdf(t);
}

double compute_mu(const BinaryInputChannel& ch) {
    if (is_degenerate(ch))
        throw DegenerateChannelError("compute_mu: degenerate channel (q+ == q-)");
    const Interval s = ch.integration_support();
    const auto breaks = ch.breakpoints();
    // Psi(Lambda(y)) min(q+,q-)/2 integrates the defining pair of region
    // integrals at once: the min picks q+ where q+ < q- and q- where q- < q+.
    return integrate_or_throw(
        [&](double y) { return ch.reliability_cdf(std::abs(ch.llr(y))) * min_half(ch, y); },
        s.lo, s.hi, breaks, kChannelQuad);
}

double compute_a(const BinaryInputChannel& ch, double lambda) {
    if (lambda < 0.0) throw std::domain_error("compute_a: reliability must be >= 0");
    return ch.error_reliability_tail(lambda);
}

double compute_sigma_sq(const BinaryInputChannel& ch) {
    const Interval s = ch.integration_support();
    const auto breaks = ch.breakpoints();
    // W = E Psi(Lambda) + a(Lambda); conditionally on Y = y the error
    // indicator is Bernoulli(1/(1+e^Lambda)), giving closed conditional
    // moments for the quadrature over y.
    auto moments = [&](double y, double& m1, double& m2) {
        const double lam = std::abs(ch.llr(y));
        const double pe = 1.0 / (1.0 + std::exp(lam));
        const double ps = ch.reliability_cdf(lam);
        const double av = ch.error_reliability_tail(lam);
        m1 = pe * (ps + av) + (1.0 - pe) * av;
        m2 = pe * (ps + av) * (ps + av) + (1.0 - pe) * av * av;
    };
    const double ew = integrate_or_throw(
        [&](double y) {
            double m1, m2;
            moments(y, m1, m2);
            return m1 * output_density(ch, y);
        },
        s.lo, s.hi, breaks, kChannelQuad);
    const double ew2 = integrate_or_throw(
        [&](double y) {
            double m1, m2;
            moments(y, m1, m2);
            return m2 * output_density(ch, y);
        },
        s.lo, s.hi, breaks, kChannelQuad);
    const double var = ew2 - ew * ew;
    return var < 0.0 ? 0.0 : var;
}

IorbVorb compute_i_orb_v_orb(const BinaryInputChannel& ch) {
    const double mu = compute_mu(ch);
    if (!(mu >= 0.0 && mu < 0.25))
        throw std::domain_error("compute_i_orb_v_orb: mu outside [0, 1/4): " + std::to_string(mu));
    if (mu == 0.0) {
        // noiseless limit: the metric of the transmitted codeword vanishes
        return {std::numbers::ln2, std::numbers::ln2, 0.0};
    }
    const SaddlepointSolution sol = solve_saddlepoint_any(mu);
    const double i_legendre = sol.rate;

    // Variational route: minimize (K(theta) + ln 2) - theta * mu_hat over
    // theta < 0 by golden section, with mu_hat re-derived from the two
    // region integrals.
    const Interval s = ch.integration_support();
    const auto breaks = ch.breakpoints();
    const double region_lo = integrate_or_throw(
        [&](double y) {
            const double qp = ch.q_plus(y), qm = ch.q_minus(y);
            return qp < qm ? ch.reliability_cdf(std::abs(ch.llr(y))) * qp : 0.0;
        },
        s.lo, s.hi, breaks, kChannelQuad);
    const double region_hi = integrate_or_throw(
        [&](double y) {
            const double qp = ch.q_plus(y), qm = ch.q_minus(y);
            return qp > qm ? ch.reliability_cdf(std::abs(ch.llr(y))) * qm : 0.0;
        },
        s.lo, s.hi, breaks, kChannelQuad);
    const double mu_hat = 0.5 * (region_lo + region_hi);
    auto objective = [&](double theta) {
        return cgf(theta) + std::numbers::ln2 - theta * mu_hat;
    };
    double a = 4.0 * sol.theta, b = 0.25 * sol.theta;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 120; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = objective(x2);
        }
    }
    const double i_variational = std::numbers::ln2 - std::min(f1, f2);

    // both routes rest on quadratures of absolute accuracy ~1e-10 for mu,
    // which the Legendre value amplifies by |theta|
    const double route_tol = std::max(1e-8, 2e-9 * std::abs(sol.theta));
    if (std::abs(i_legendre - i_variational) > route_tol)
        throw std::runtime_error("compute_i_orb_v_orb: Legendre and variational values disagree: " +
                                 std::to_string(i_legendre) + " vs " +
                                 std::to_string(i_variational));

    return {i_legendre, i_variational, sol.theta * sol.theta * compute_sigma_sq(ch)};
}

SymbolDraw draw_symbol(const BinaryInputChannel& ch, Rng& rng) {
    const int x = rng.sign();
    const double y = ch.sample(x, rng);
    const double l = ch.llr(y);
    const int hard = l >= 0.0 ? 1 : -1;  // sgn(0) = +1
    return {std::abs(l), hard * x < 0};
}

ReliabilityModel ReliabilityModel::compute(std::shared_ptr<const BinaryInputChannel> ch) {
    ReliabilityModel rm;
    rm.channel_ = std::move(ch);
    rm.mu_ = compute_mu(*rm.channel_);
    if (!(rm.mu_ > 0.0 && rm.mu_ < 0.25))
        throw std::domain_error("ReliabilityModel: mu outside (0, 1/4)");
    rm.sigma_sq_ = compute_sigma_sq(*rm.channel_);
    const SaddlepointSolution sol = solve_saddlepoint_any(rm.mu_);
    rm.theta_mu_ = sol.theta;
    rm.i_orb_ = sol.rate;
    rm.v_orb_ = sol.theta * sol.theta * rm.sigma_sq_;
    return rm;
}

}  // namespace orbfb
