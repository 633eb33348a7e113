#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "orbfb/channel.hpp"
#include "orbfb/tail.hpp"

namespace orbfb {

// ensemble_fer_sim tags decoder-simulation results that reuse the estimate
// record; the five bound methods are the selectable ones.
enum class Method { orb_rcu_mc, orb_na, ml_rcu_relax_mc, ml_na, na_converse, ensemble_fer_sim };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct BoundEstimate {
    double value = 0.0;       // probability (or rate, for rate-valued methods)
    double half_width = 0.0;  // 95% confidence half-width; 0 for deterministic formulas
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    Method method = Method::orb_na;
};

// Blocklength plus codebook size, carried as ln M so that M = ceil(e^{nR})
// never has to materialize beyond 2^62.
struct OperatingPoint {
    int n = 0;
    double log_m = 0.0;

    static OperatingPoint from_m(int n, std::uint64_t m);
    static OperatingPoint from_rate(int n, double rate_nats);

    double rate_nats() const { return log_m / n; }
    double log_m_minus_1() const;
};

struct McOptions {
    std::uint64_t samples = 2'000'000;
    std::uint64_t seed = 12345;
    int shards = 256;  // reduction is ordered by shard, so results depend
                       // only on (seed, shards), not the thread count
    int threads = 0;   // 0: hardware concurrency
};

// Monte Carlo evaluation of the ORB random-coding union bound
//   E[ min{1, (M-1) F_{zeta_n}(S)} ],
// S the transmitted-codeword metric in integer form. The per-sample log
// tail values depend only on (channel, n, samples, seed), so one sample set
// serves every M via evaluate().
class RcuSampleSet {
public:
    RcuSampleSet(const BinaryInputChannel& ch, const TailTable& table, const McOptions& opt);
    BoundEstimate evaluate(double log_m_minus_1) const;
    BoundEstimate evaluate(const OperatingPoint& op) const { return evaluate(op.log_m_minus_1()); }

private:
    std::vector<double> log_f_;  // ln F_{zeta_n}(S_i) in shard order
    McOptions opt_;
};

BoundEstimate orb_rcu(const BinaryInputChannel& ch, const OperatingPoint& op,
                      const TailTable& table, const McOptions& opt = {});

// Monte Carlo evaluation of the ML random-coding union relaxation
//   E[ min{1, (M-1) e^{-i(X;Y)}} ],
// i the blockwise information density under uniform inputs.
class MlRcuSampleSet {
public:
    MlRcuSampleSet(const BinaryInputChannel& ch, int n, const McOptions& opt);
    BoundEstimate evaluate(double log_m_minus_1) const;
    BoundEstimate evaluate(const OperatingPoint& op) const { return evaluate(op.log_m_minus_1()); }

private:
    std::vector<double> info_density_;  // blockwise information density per sample
    McOptions opt_;
};

BoundEstimate ml_rcu_relaxed(const BinaryInputChannel& ch, const OperatingPoint& op,
                             const McOptions& opt = {});

// Normal approximations (deterministic).
double orb_na_epsilon(const ReliabilityModel& rm, const OperatingPoint& op);
double orb_na_rate(const ReliabilityModel& rm, int n, double epsilon);
// raw-coefficient form: I - sqrt(V/n) Q^{-1}(eps) + ln(n)/(2n)
double na_rate(double first_order, double dispersion, int n, double epsilon);

struct CapacityDispersion {
    double capacity;    // nats
    double dispersion;  // nats^2
};
CapacityDispersion capacity_and_dispersion(const BinaryInputChannel& ch);

double ml_na_epsilon(const CapacityDispersion& cd, const OperatingPoint& op);
double ml_na_rate(const CapacityDispersion& cd, int n, double epsilon);
double na_converse_rate(const BinaryInputChannel& ch, int n, double epsilon);

// Evaluation context shared by the inversion routines: the reliability model
// and capacity pair are computed once, tail tables are cached.
struct BoundContext {
    std::shared_ptr<const BinaryInputChannel> channel;
    ReliabilityModel rm;
    CapacityDispersion cd;
    TailTableCache tables;

    static BoundContext make(std::shared_ptr<const BinaryInputChannel> ch,
                             std::string cache_dir = "");
};

// Largest M with bound(n, M) <= epsilon, by bisection on ln M. Monte Carlo
// methods decide each probe on the upper confidence limit and share one
// sample set across probes (common random numbers keep the bound exactly
// monotone in M). Throws if already infeasible at M = 2.
OperatingPoint max_rate(BoundContext& ctx, int n, double epsilon, Method method,
                        const McOptions& opt = {});

// Smallest n with bound(n, ceil(e^{R n})) <= epsilon at R = rate_fraction * C.
// The search brackets around the normal-approximation prediction and then
// bisects; capped at n = 1e5.
int min_blocklength(BoundContext& ctx, double rate_fraction, double epsilon, Method method,
                    const McOptions& opt = {});

}  // namespace orbfb
