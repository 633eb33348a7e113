#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "orbfb/bounds.hpp"
#include "orbfb/channel.hpp"
#include "orbfb/quadrature.hpp"

using namespace orbfb;

namespace {

std::shared_ptr<BpskAwgnChannel> bpsk(double snr_db) {
    return std::make_shared<BpskAwgnChannel>(snr_db);
}

// disjoint-support channel: constant reliability, zero hard-decision errors
GenericChannel noiseless_channel() {
    return GenericChannel(
        [](double y) { return (y >= 1.0 && y <= 2.0) ? 1.0 : 0.0; },
        [](double y) { return (y >= -2.0 && y <= -1.0) ? 1.0 : 0.0; }, {-2.5, 2.5},
        {-2.0, -1.0, 1.0, 2.0},
        [](int x, Rng& rng) { return x > 0 ? 1.0 + rng.uniform() : -2.0 + rng.uniform(); });
}

GenericChannel degenerate_channel() {
    auto unif = [](double y) { return (y >= -1.0 && y <= 1.0) ? 0.5 : 0.0; };
    return GenericChannel(unif, unif, {-1.5, 1.5}, {-1.0, 1.0});
}

// same law as BpskAwgnChannel(0 dB) but through the generic quadrature paths
GenericChannel generic_bpsk0db() {
    auto qp = [](double y) { return std::exp(-0.5 * (y - 1.0) * (y - 1.0)) / std::sqrt(2.0 * std::numbers::pi); };
    auto qm = [](double y) { return std::exp(-0.5 * (y + 1.0) * (y + 1.0)) / std::sqrt(2.0 * std::numbers::pi); };
    return GenericChannel(qp, qm, {-9.5, 9.5}, {0.0},
                          [](int x, Rng& rng) { return x + rng.normal(); });
}

}  // namespace

TEST_CASE("bpsk channel basics") {
    const auto ch = bpsk(0.0);
    CHECK(ch->noise_variance() == doctest::Approx(1.0));
    CHECK(ch->llr(0.37) == doctest::Approx(0.74));
    // densities normalized over the declared support
    for (auto q : {&BinaryInputChannel::q_plus, &BinaryInputChannel::q_minus}) {
        const auto s = ch->integration_support();
        const double mass =
            adaptive_quad([&](double y) { return (ch.get()->*q)(y); }, s.lo, s.hi).value;
        CHECK(std::abs(mass - 1.0) < 1e-10);
    }
    // symmetry q+(y) = q-(-y)
    CHECK(ch->q_plus(1.3) == doctest::Approx(ch->q_minus(-1.3)).epsilon(1e-15));
}

TEST_CASE("psi edge values and monotonicity") {
    const auto ch = bpsk(0.0);
    CHECK(psi(*ch, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(psi(*ch, 1e9) == doctest::Approx(1.0));
    CHECK_THROWS_AS(psi(*ch, -0.5), std::domain_error);
    double prev = -1.0;
    for (double t = 0.0; t <= 20.0; t += 0.25) {
        const double v = psi(*ch, t);
        CHECK(v >= prev);
        CHECK(v <= 1.0);
        prev = v;
    }
}

TEST_CASE("psi at the sampled reliability median is one half") {
    const auto ch = bpsk(0.0);
    Rng rng(20260810, 0);
    const int n = 1'000'000;
    std::vector<double> lam(n);
    for (auto& v : lam) v = draw_symbol(*ch, rng).lambda;
    std::nth_element(lam.begin(), lam.begin() + n / 2, lam.end());
    CHECK(psi(*ch, lam[n / 2]) == doctest::Approx(0.5).epsilon(0.004));
}

TEST_CASE("Psi(Lambda) is uniform: KS test at the 1% level") {
    const auto ch = bpsk(0.0);
    Rng rng(777, 0);
    const int n = 1'000'000;
    std::vector<double> u(n);
    double mean = 0.0;
    for (auto& v : u) {
        v = psi(*ch, draw_symbol(*ch, rng).lambda);
        mean += v;
    }
    mean /= n;
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        ks = std::max(ks, std::abs(u[i] - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - u[i]));
    }
    CHECK(ks < 1.62762 / std::sqrt(static_cast<double>(n)));
    // E[Psi(Lambda)] = 1/2; SE of a Unif[0,1] mean is 1/sqrt(12 n)
    CHECK(std::abs(mean - 0.5) < 3.0 / std::sqrt(12.0 * n));
}

TEST_CASE("compute_mu against a Monte Carlo oracle at 0 dB") {
    const auto ch = bpsk(0.0);
    const double mu = compute_mu(*ch);
    Rng rng(1001, 0);
    const std::int64_t n = 10'000'000;
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto sd = draw_symbol(*ch, rng);
        const double v = sd.error ? psi(*ch, sd.lambda) : 0.0;
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mu - mean) <= 3.0 * se);
}

TEST_CASE("mu vanishes in the noiseless limit") {
    CHECK(compute_mu(*bpsk(30.0)) < 1e-3);
}

TEST_CASE("mu stays inside (0, 1/4) across the SNR range") {
    for (double snr = -10.0; snr <= 20.0; snr += 1.0) {
        const double mu = compute_mu(*bpsk(snr));
        CHECK(mu > 0.0);
        CHECK(mu < 0.25);
    }
}

TEST_CASE("mu is nonincreasing in SNR") {
    double prev = 1.0;
    for (double snr = -5.0; snr <= 15.0; snr += 0.5) {
        const double mu = compute_mu(*bpsk(snr));
        CHECK(mu <= prev + 1e-12);
        prev = mu;
    }
}

TEST_CASE("compute_a edge cases and monotonicity") {
    const auto ch = bpsk(0.0);
    CHECK(compute_a(*ch, 1e6) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(compute_a(*ch, -1.0), std::domain_error);
    double prev = 1.0;
    for (int i = 0; i < 20; ++i) {
        const double v = compute_a(*ch, 0.4 * i);
        CHECK(v <= prev + 1e-14);
        prev = v;
    }
}

TEST_CASE("a(0) equals the hard-decision error rate") {
    const auto ch = bpsk(0.0);
    const double a0 = compute_a(*ch, 0.0);
    // Monte Carlo hard-decision error rate
    Rng rng(2002, 0);
    const std::int64_t n = 10'000'000;
    std::int64_t errs = 0;
    for (std::int64_t i = 0; i < n; ++i) errs += draw_symbol(*ch, rng).error;
    const double fer = static_cast<double>(errs) / n;
    const double se = std::sqrt(fer * (1.0 - fer) / n);
    CHECK(std::abs(a0 - fer) <= 3.0 * se);

    // quadrature identity a(0) = E[1/(1+e^Lambda)]
    const auto s = ch->integration_support();
    const double rhs = adaptive_quad(
                           [&](double y) {
                               const double lam = std::abs(ch->llr(y));
                               const double py = 0.5 * (ch->q_plus(y) + ch->q_minus(y));
                               return py / (1.0 + std::exp(lam));
                           },
                           s.lo, s.hi, std::vector<double>{0.0}, QuadOptions{1e-12, 1'000'000})
                           .value;
    CHECK(std::abs(a0 - rhs) <= 1e-8);
}

TEST_CASE("compute_sigma_sq against a Monte Carlo oracle at 0 dB") {
    const auto ch = bpsk(0.0);
    const double var = compute_sigma_sq(*ch);
    CHECK(var >= 0.0);

    Rng rng(3003, 0);
    const std::int64_t n = 10'000'000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    std::vector<double> w(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const auto sd = draw_symbol(*ch, rng);
        const double v =
            (sd.error ? psi(*ch, sd.lambda) : 0.0) + compute_a(*ch, sd.lambda);
        w[i] = v;
        s1 += v;
    }
    const double mean = s1 / n;
    for (std::int64_t i = 0; i < n; ++i) {
        const double c = w[i] - mean;
        s2 += c * c;
        s4 += c * c * c * c;
    }
    const double var_hat = s2 / n;
    const double se_var = std::sqrt(std::max(0.0, s4 / n - var_hat * var_hat) / n);
    CHECK(std::abs(var - var_hat) <= 3.0 * se_var);
    // variance never exceeds the raw second moment
    CHECK(var <= s2 / n + mean * mean + 3.0 * se_var);
}

TEST_CASE("sigma_sq is zero for a constant-reliability errorless channel") {
    const auto ch = noiseless_channel();
    CHECK(compute_sigma_sq(ch) == 0.0);
}

TEST_CASE("degenerate channel raises") {
    const auto ch = degenerate_channel();
    CHECK_THROWS_AS(compute_mu(ch), DegenerateChannelError);
}

TEST_CASE("i_orb routes agree and respect the capacity ceiling") {
    for (double snr : {0.0, 1.0, 2.0, 3.0}) {
        const auto ch = bpsk(snr);
        const auto iv = compute_i_orb_v_orb(*ch);
        CHECK(std::abs(iv.i_orb - iv.i_orb_variational) <= 1e-8);
        const auto cd = capacity_and_dispersion(*ch);
        CHECK(iv.i_orb <= cd.capacity);
        CHECK(iv.v_orb > 0.0);
    }
}

TEST_CASE("i_orb approaches ln 2 at high SNR") {
    CHECK(compute_i_orb_v_orb(*bpsk(15.0)).i_orb >= 0.68);
}

TEST_CASE("reliability model bundles the saddlepoint consistently") {
    const auto rm = ReliabilityModel::compute(bpsk(0.0));
    CHECK(rm.v_orb() == rm.theta_mu() * rm.theta_mu() * rm.sigma_sq());
    CHECK(rm.theta_mu() < 0.0);
    CHECK(rm.mu() > 0.0);
    CHECK(rm.mu() < 0.25);
    CHECK(rm.psi(0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rm.a_fn(0.0) == doctest::Approx(compute_a(rm.channel(), 0.0)).epsilon(1e-12));
}

TEST_CASE("v_orb is unimodal in SNR") {
    std::vector<double> v;
    for (double snr = -6.0; snr <= 12.0 + 1e-9; snr += 0.5)
        v.push_back(compute_i_orb_v_orb(*bpsk(snr)).v_orb);
    int sign_changes = 0;
    int prev_sign = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const int s = v[i] > v[i - 1] ? 1 : -1;
        if (prev_sign != 0 && s != prev_sign) ++sign_changes;
        prev_sign = s;
    }
    CHECK(sign_changes == 1);  // rises, peaks, falls
}

TEST_CASE("generic quadrature path reproduces the closed forms") {
    const auto closed = bpsk(0.0);
    const auto generic = generic_bpsk0db();
    for (double t : {0.3, 1.0, 2.5, 6.0}) {
        CHECK(psi(generic, t) == doctest::Approx(psi(*closed, t)).epsilon(1e-7));
        CHECK(compute_a(generic, t) == doctest::Approx(compute_a(*closed, t)).epsilon(1e-7));
    }
    CHECK(compute_mu(generic) == doctest::Approx(compute_mu(*closed)).epsilon(1e-7));
}
