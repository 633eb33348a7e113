#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "orbfb/rng.hpp"

namespace orbfb {

struct Interval {
    double lo;
    double hi;
};

struct DegenerateChannelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary-input memoryless channel with output densities q+(y), q-(y).
// Implementations must be immutable after construction; all methods are
// const and safe to call concurrently. Sampling draws from an RNG owned
// by the caller.
class BinaryInputChannel {
public:
    virtual ~BinaryInputChannel() = default;

    virtual double q_plus(double y) const = 0;
    virtual double q_minus(double y) const = 0;

    // log-likelihood ratio ln(q+(y)/q-(y)); clamped to +-1400 where one
    // density vanishes so that 1/(1+e^Lambda) underflows cleanly to 0
    virtual double llr(double y) const;

    // channel output for input x in {+1,-1}
    virtual double sample(int x, Rng& rng) const = 0;

    // interval carrying all but <= 1e-14 of the mass of both densities
    virtual Interval integration_support() const = 0;

    // interior points forced to be quadrature panel boundaries (LLR sign
    // changes, density kinks)
    virtual std::vector<double> breakpoints() const { return {}; }

    // Psi(t) = Pr[|LLR(Y)| <= t] under equiprobable inputs.
    // Default: adaptive quadrature of the indicator against the output law.
    virtual double reliability_cdf(double t) const;

    // a(lambda) = Pr[E = 1, Lambda >= lambda], E the hard-decision error
    // indicator. Equals the integral of min(q+,q-)/2 over {Lambda >= lambda}.
    virtual double error_reliability_tail(double lambda) const;
};

// BPSK over AWGN: Y = X + Z with Z ~ N(0, sigma_z^2) and
// SNR(dB) = -10 log10(sigma_z^2) (unit symbol energy). llr(y) = 2y/sigma_z^2.
class BpskAwgnChannel final : public BinaryInputChannel {
public:
    explicit BpskAwgnChannel(double snr_db);

    double snr_db() const { return snr_db_; }
    double noise_variance() const { return sigma_sq_; }

    double q_plus(double y) const override;
    double q_minus(double y) const override;
    double llr(double y) const override { return 2.0 * y / sigma_sq_; }
    double sample(int x, Rng& rng) const override { return x + sigma_ * rng.normal(); }
    Interval integration_support() const override;
    std::vector<double> breakpoints() const override { return {0.0}; }

    // closed forms: Gaussian-CDF differences on the |Y| thresholds
    double reliability_cdf(double t) const override;
    double error_reliability_tail(double lambda) const override;

private:
    double snr_db_;
    double sigma_sq_;
    double sigma_;
};

// Channel defined by arbitrary density callables; statistics fall back to
// the base-class quadrature paths. Sampling is optional.
class GenericChannel final : public BinaryInputChannel {
public:
    using Density = std::function<double(double)>;
    using Sampler = std::function<double(int, Rng&)>;

    GenericChannel(Density q_plus, Density q_minus, Interval support,
                   std::vector<double> breakpoints = {}, Sampler sampler = nullptr);

    double q_plus(double y) const override { return qp_(y); }
    double q_minus(double y) const override { return qm_(y); }
    double sample(int x, Rng& rng) const override;
    Interval integration_support() const override { return support_; }
    std::vector<double> breakpoints() const override { return breaks_; }

private:
    Density qp_, qm_;
    Interval support_;
    std::vector<double> breaks_;
    Sampler sampler_;
};

// --- single-letter ORBGRAND statistics -------------------------------------

// Pr[|LLR| <= t]; throws std::domain_error for t < 0.
double psi(const BinaryInputChannel& ch, double t);

// mu = E[Psi(Lambda) E] in (0, 1/4) for non-degenerate channels; throws
// DegenerateChannelError when q+ and q- coincide.
double compute_mu(const BinaryInputChannel& ch);

// a(lambda) = Pr[E = 1, Lambda >= lambda]; nonincreasing in lambda.
double compute_a(const BinaryInputChannel& ch, double lambda);

// Var(E Psi(Lambda) + a(Lambda)) by quadrature over the output law.
double compute_sigma_sq(const BinaryInputChannel& ch);

struct IorbVorb {
    double i_orb;              // nats, Legendre value theta_mu * mu - K(theta_mu)
    double i_orb_variational;  // nats, direct minimization of the explicit inf form
    double v_orb;              // nats^2
};

// First- and second-order ORBGRAND coefficients. The rate is computed both
// through the saddlepoint Legendre value and by direct minimization of the
// explicit variational form; disagreement beyond quadrature accuracy throws.
IorbVorb compute_i_orb_v_orb(const BinaryInputChannel& ch);

// one transmitted symbol's reliability and hard-decision error indicator
struct SymbolDraw {
    double lambda;
    bool error;
};
SymbolDraw draw_symbol(const BinaryInputChannel& ch, Rng& rng);

// Precomputed single-letter bundle shared by bound evaluations. Immutable.
class ReliabilityModel {
public:
    static ReliabilityModel compute(std::shared_ptr<const BinaryInputChannel> ch);

    double psi(double t) const { return channel_->reliability_cdf(t); }
    double a_fn(double lambda) const { return channel_->error_reliability_tail(lambda); }
    double mu() const { return mu_; }
    double sigma_sq() const { return sigma_sq_; }
    double theta_mu() const { return theta_mu_; }
    double i_orb() const { return i_orb_; }
    double v_orb() const { return v_orb_; }
    const BinaryInputChannel& channel() const { return *channel_; }

private:
    std::shared_ptr<const BinaryInputChannel> channel_;
    double mu_ = 0, sigma_sq_ = 0, theta_mu_ = 0, i_orb_ = 0, v_orb_ = 0;
};

}  // namespace orbfb
