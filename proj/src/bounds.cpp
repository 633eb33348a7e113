#include "orbfb/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <thread>

#include "orbfb/gauss.hpp"
#include "orbfb/metric.hpp"
#include "orbfb/quadrature.hpp"

namespace orbfb {
namespace {

constexpr double kZ95 = 1.959963984540054;  // Q^{-1}(0.025)
constexpr std::uint64_t kMaterializeLogMax = 42;  // e^42 < 2^62

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(shard, rng, count) over opt.shards shards; sample counts split as
// evenly as possible. Thread assignment does not affect any result because
// every shard owns its RNG stream.
template <typename Fn>
void run_sharded(const McOptions& opt, Fn&& fn) {
    const int shards = std::max(1, opt.shards);
    const std::uint64_t base = opt.samples / shards;
    const std::uint64_t extra = opt.samples % shards;
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int shard = next.fetch_add(1);
            if (shard >= shards) return;
            Rng rng(opt.seed, static_cast<std::uint64_t>(shard));
            const std::uint64_t count = base + (static_cast<std::uint64_t>(shard) < extra ? 1 : 0);
            fn(shard, rng, count);
        }
    };
    const int nthreads = std::min(resolve_threads(opt.threads), shards);
    std::vector<std::thread> pool;
    pool.reserve(nthreads - 1);
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

// order-deterministic pairwise reduction
double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 64) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

std::uint64_t shard_offset(const McOptions& opt, int shard) {
    const int shards = std::max(1, opt.shards);
    const std::uint64_t base = opt.samples / shards;
    const std::uint64_t extra = opt.samples % shards;
    const std::uint64_t s = static_cast<std::uint64_t>(shard);
    return s * base + std::min(s, extra);
}

// mean and 95% half-width of clamped values from stored per-sample statistics
BoundEstimate reduce_minclamp(std::span<const double> log_terms, double log_m1,
                              const McOptions& opt, Method method) {
    // block-local accumulation, then pairwise over blocks: deterministic and
    // numerically stable for ~1e7 samples
    constexpr std::size_t kBlock = 4096;
    const std::size_t nblocks = (log_terms.size() + kBlock - 1) / kBlock;
    std::vector<double> bsum(nblocks, 0.0), bsq(nblocks, 0.0);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(lo + kBlock, log_terms.size());
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double t = log_m1 + log_terms[i];
            const double v = t >= 0.0 ? 1.0 : std::exp(t);
            s += v;
            s2 += v * v;
        }
        bsum[b] = s;
        bsq[b] = s2;
    }
    const double n = static_cast<double>(log_terms.size());
    const double mean = pairwise_sum(bsum) / n;
    const double meansq = pairwise_sum(bsq) / n;
    const double var = std::max(0.0, meansq - mean * mean);
    BoundEstimate est;
    est.value = std::clamp(mean, 0.0, 1.0);
    est.half_width = kZ95 * std::sqrt(var / n);
    est.samples = log_terms.size();
    est.seed = opt.seed;
    est.method = method;
    return est;
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::orb_rcu_mc: return "ORB_RCU_MC";
        case Method::orb_na: return "ORB_NA";
        case Method::ml_rcu_relax_mc: return "ML_RCU_RELAX_MC";
        case Method::ml_na: return "ML_NA";
        case Method::na_converse: return "NA_CONVERSE";
        case Method::ensemble_fer_sim: return "ENSEMBLE_FER_SIM";
    }
    throw std::logic_error("method_name: bad enum");
}

Method method_from_name(const std::string& name) {
    if (name == "ORB_RCU_MC") return Method::orb_rcu_mc;
    if (name == "ORB_NA") return Method::orb_na;
    if (name == "ML_RCU_RELAX_MC") return Method::ml_rcu_relax_mc;
    if (name == "ML_NA") return Method::ml_na;
    if (name == "NA_CONVERSE") return Method::na_converse;
    throw std::invalid_argument("unknown method: " + name);
}

OperatingPoint OperatingPoint::from_m(int n, std::uint64_t m) {
    if (m < 1) throw std::invalid_argument("OperatingPoint: M must be >= 1");
    return {n, std::log(static_cast<double>(m))};
}

OperatingPoint OperatingPoint::from_rate(int n, double rate_nats) {
    const double x = rate_nats * n;
    if (x <= kMaterializeLogMax) {
        const auto m = static_cast<std::uint64_t>(std::ceil(std::exp(x) - 1e-12));
        return {n, std::log(static_cast<double>(std::max<std::uint64_t>(m, 2)))};
    }
    return {n, x};
}

double OperatingPoint::log_m_minus_1() const {
    if (log_m <= kMaterializeLogMax) {
        const double m = std::round(std::exp(log_m));
        if (m <= 1.0) return -std::numeric_limits<double>::infinity();
        return std::log(m - 1.0);
    }
    return log_m + std::log1p(-std::exp(-log_m));
}

RcuSampleSet::RcuSampleSet(const BinaryInputChannel& ch, const TailTable& table,
                           const McOptions& opt)
    : opt_(opt) {
    log_f_.resize(opt.samples);
    const int n = table.n();
    run_sharded(opt, [&](int shard, Rng& rng, std::uint64_t count) {
        std::uint64_t at = shard_offset(opt, shard);
        for (std::uint64_t i = 0; i < count; ++i, ++at) {
            const MetricSample ms = sample_transmitted_metric(ch, n, rng);
            log_f_[at] = table.log_cdf(ms.s);
        }
    });
}

BoundEstimate RcuSampleSet::evaluate(double log_m_minus_1) const {
    return reduce_minclamp(log_f_, log_m_minus_1, opt_, Method::orb_rcu_mc);
}

BoundEstimate orb_rcu(const BinaryInputChannel& ch, const OperatingPoint& op,
                      const TailTable& table, const McOptions& opt) {
    if (table.n() != op.n) throw std::invalid_argument("orb_rcu: table blocklength mismatch");
    return RcuSampleSet(ch, table, opt).evaluate(op);
}

MlRcuSampleSet::MlRcuSampleSet(const BinaryInputChannel& ch, int n, const McOptions& opt)
    : opt_(opt) {
    info_density_.resize(opt.samples);
    run_sharded(opt, [&](int shard, Rng& rng, std::uint64_t count) {
        std::uint64_t at = shard_offset(opt, shard);
        for (std::uint64_t i = 0; i < count; ++i, ++at) {
            double sum = 0.0;
            for (int j = 0; j < n; ++j) {
                const int x = rng.sign();
                const double y = ch.sample(x, rng);
                const double l = ch.llr(y);
                // i(x; y) = ln 2 - ln(1 + e^{-x llr})
                const double t = x > 0 ? -l : l;
                sum += std::numbers::ln2 - (t > 0 ? t + std::log1p(std::exp(-t))
                                                  : std::log1p(std::exp(t)));
            }
            info_density_[at] = sum;
        }
    });
}

BoundEstimate MlRcuSampleSet::evaluate(double log_m_minus_1) const {
    // reuse the clamped reducer with log terms -i(X;Y)
    std::vector<double> neg(info_density_.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -info_density_[i];
    return reduce_minclamp(neg, log_m_minus_1, opt_, Method::ml_rcu_relax_mc);
}

BoundEstimate ml_rcu_relaxed(const BinaryInputChannel& ch, const OperatingPoint& op,
                             const McOptions& opt) {
    return MlRcuSampleSet(ch, op.n, opt).evaluate(op);
}

double orb_na_epsilon(const ReliabilityModel& rm, const OperatingPoint& op) {
    if (!(rm.v_orb() > 0.0)) throw std::domain_error("orb_na_epsilon: v_orb must be positive");
    const double n = op.n;
    const double arg =
        (n * rm.i_orb() - op.log_m_minus_1() + 0.5 * std::log(n)) / std::sqrt(n * rm.v_orb());
    return gaussian_tail(arg);
}

double na_rate(double first_order, double dispersion, int n, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("na_rate: epsilon outside (0,1)");
    if (dispersion < 0.0) throw std::domain_error("na_rate: negative dispersion");
    return first_order - std::sqrt(dispersion / n) * gaussian_tail_inv(epsilon) +
           std::log(static_cast<double>(n)) / (2.0 * n);
}

double orb_na_rate(const ReliabilityModel& rm, int n, double epsilon) {
    return na_rate(rm.i_orb(), rm.v_orb(), n, epsilon);
}

CapacityDispersion capacity_and_dispersion(const BinaryInputChannel& ch) {
    const Interval s = ch.integration_support();
    const auto breaks = ch.breakpoints();
    const QuadOptions qopt{1e-10, 1'000'000};
    // information density through the LLR, overflow-safe:
    // i(+1; y) = ln 2 - ln(1 + e^{-llr}), i(-1; y) = ln 2 - ln(1 + e^{llr})
    auto dens = [&](double y, int x) {
        const double l = ch.llr(y);
        const double t = x > 0 ? -l : l;
        return std::numbers::ln2 -
               (t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)));
    };
    const double c = integrate_or_throw(
        [&](double y) {
            return 0.5 * (ch.q_plus(y) * dens(y, +1) + ch.q_minus(y) * dens(y, -1));
        },
        s.lo, s.hi, breaks, qopt);
    const double e2 = integrate_or_throw(
        [&](double y) {
            const double ip = dens(y, +1), im = dens(y, -1);
            return 0.5 * (ch.q_plus(y) * ip * ip + ch.q_minus(y) * im * im);
        },
        s.lo, s.hi, breaks, qopt);
    return {c, std::max(0.0, e2 - c * c)};
}

double ml_na_epsilon(const CapacityDispersion& cd, const OperatingPoint& op) {
    if (!(cd.dispersion > 0.0)) throw std::domain_error("ml_na_epsilon: dispersion must be positive");
    const double n = op.n;
    const double arg = (n * cd.capacity - op.log_m_minus_1() + 0.5 * std::log(n)) /
                       std::sqrt(n * cd.dispersion);
    return gaussian_tail(arg);
}

double ml_na_rate(const CapacityDispersion& cd, int n, double epsilon) {
    return na_rate(cd.capacity, cd.dispersion, n, epsilon);
}

double na_converse_rate(const BinaryInputChannel& ch, int n, double epsilon) {
    return ml_na_rate(capacity_and_dispersion(ch), n, epsilon);
}

BoundContext BoundContext::make(std::shared_ptr<const BinaryInputChannel> ch,
                                std::string cache_dir) {
    BoundContext ctx{ch, ReliabilityModel::compute(ch), capacity_and_dispersion(*ch),
                     TailTableCache(std::move(cache_dir))};
    return ctx;
}

namespace {

// feasibility oracle at fixed n, reusing MC sample sets across M probes
class ProbeAtN {
public:
    ProbeAtN(BoundContext& ctx, int n, Method method, const McOptions& opt)
        : ctx_(ctx), n_(n), method_(method), opt_(opt) {
        if (method == Method::orb_rcu_mc)
            rcu_ = std::make_unique<RcuSampleSet>(*ctx.channel, *ctx.tables.get(n), opt);
        else if (method == Method::ml_rcu_relax_mc)
            ml_ = std::make_unique<MlRcuSampleSet>(*ctx.channel, n, opt);
    }

    // bound value; MC methods report the estimate, decisions add half_width
    BoundEstimate at(double log_m_minus_1) const {
        switch (method_) {
            case Method::orb_rcu_mc: return rcu_->evaluate(log_m_minus_1);
            case Method::ml_rcu_relax_mc: return ml_->evaluate(log_m_minus_1);
            case Method::orb_na: {
                BoundEstimate est;
                est.method = method_;
                est.value = orb_na_epsilon_lnm1(log_m_minus_1);
                return est;
            }
            case Method::ml_na: {
                BoundEstimate est;
                est.method = method_;
                const double n = n_;
                const double arg = (n * ctx_.cd.capacity - log_m_minus_1 + 0.5 * std::log(n)) /
                                   std::sqrt(n * ctx_.cd.dispersion);
                est.value = gaussian_tail(arg);
                return est;
            }
            default: throw std::invalid_argument("bound inversion: unsupported method");
        }
    }

    bool feasible(double log_m_minus_1, double epsilon) const {
        const BoundEstimate est = at(log_m_minus_1);
        return est.value + est.half_width <= epsilon;
    }

private:
    double orb_na_epsilon_lnm1(double log_m_minus_1) const {
        const double n = n_;
        const double arg = (n * ctx_.rm.i_orb() - log_m_minus_1 + 0.5 * std::log(n)) /
                           std::sqrt(n * ctx_.rm.v_orb());
        return gaussian_tail(arg);
    }

    BoundContext& ctx_;
    int n_;
    Method method_;
    McOptions opt_;
    std::unique_ptr<RcuSampleSet> rcu_;
    std::unique_ptr<MlRcuSampleSet> ml_;
};

}  // namespace

OperatingPoint max_rate(BoundContext& ctx, int n, double epsilon, Method method,
                        const McOptions& opt) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("max_rate: epsilon outside (0,1)");
    const ProbeAtN probe(ctx, n, method, opt);
    const OperatingPoint m2 = OperatingPoint::from_m(n, 2);
    if (!probe.feasible(m2.log_m_minus_1(), epsilon))
        throw std::runtime_error("max_rate: infeasible already at M = 2");

    // the bound is monotone in M; bisect on ln(M-1)
    double lo = m2.log_m_minus_1();                    // feasible
    double hi = n * std::numbers::ln2 + 1.0;           // beyond one bit/use: infeasible
    if (probe.feasible(hi, epsilon)) return {n, hi};   // saturated channel corner
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (probe.feasible(mid, epsilon) ? lo : hi) = mid;
    }
    // report as ln M = ln((M-1) + 1)
    const double log_m = lo > kMaterializeLogMax ? lo : std::log1p(std::exp(lo));
    return {n, log_m};
}

int min_blocklength(BoundContext& ctx, double rate_fraction, double epsilon, Method method,
                    const McOptions& opt) {
    if (!(rate_fraction > 0.0 && rate_fraction < 1.0))
        throw std::domain_error("min_blocklength: rate_fraction outside (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("min_blocklength: epsilon outside (0,1)");
    constexpr int kNMax = 100'000;
    const double rate = rate_fraction * ctx.cd.capacity;

    auto feasible = [&](int n) {
        const ProbeAtN probe(ctx, n, method, opt);
        return probe.feasible(OperatingPoint::from_rate(n, rate).log_m_minus_1(), epsilon);
    };

    // normal-approximation initial guess: smallest n with na_rate(n) >= rate
    const bool orb_family = method == Method::orb_rcu_mc || method == Method::orb_na;
    auto na_rate_at = [&](int n) {
        return orb_family ? orb_na_rate(ctx.rm, n, epsilon) : ml_na_rate(ctx.cd, n, epsilon);
    };
    int lo_n = 8, hi_n = kNMax;
    if (na_rate_at(kNMax) < rate)
        throw std::runtime_error("min_blocklength: search cap n > 1e5 exceeded");
    while (hi_n - lo_n > 1) {
        const int mid = lo_n + (hi_n - lo_n) / 2;
        (na_rate_at(mid) >= rate ? hi_n : lo_n) = mid;
    }
    const int n_guess = hi_n;

    // bracket the true crossing around the guess, factor 1.25 expansion
    int lo = 0, hi = 0;
    if (feasible(n_guess)) {
        hi = n_guess;
        lo = std::max(1, static_cast<int>(n_guess / 1.25));
        while (lo > 1 && feasible(lo)) {
            hi = lo;
            lo = std::max(1, static_cast<int>(lo / 1.25));
        }
        if (lo == 1 && feasible(1)) return 1;
    } else {
        lo = n_guess;
        hi = std::max(n_guess + 1, static_cast<int>(n_guess * 1.25));
        while (!feasible(hi)) {
            lo = hi;
            hi = static_cast<int>(hi * 1.25);
            if (hi > kNMax) throw std::runtime_error("min_blocklength: search cap n > 1e5 exceeded");
        }
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace orbfb
