#include "orbfb/codes.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "orbfb/metric.hpp"

namespace orbfb {
namespace {

constexpr int kSimNMax = 64;
constexpr int kSimMMax = 1 << 16;

int popcount_parity(std::uint64_t v) { return std::popcount(v) & 1; }

// within one weight w: subsets of {1..n} with |set| = slots, sum = w,
// visited in lexicographic order of the increasing tuples
bool visit_fixed_count(int n, int w, int slots, int next_min, std::vector<int>& acc,
                       const std::function<bool(const ErrorPattern&)>& visit,
                       std::uint64_t& budget, ErrorPattern& scratch) {
    if (slots == 0) {
        if (w != 0) return true;
        scratch.flip_set = acc;
        scratch.weight = std::accumulate(acc.begin(), acc.end(), 0);
        if (budget == 0) return false;
        --budget;
        return visit(scratch);
    }
    for (int x = next_min; x <= n; ++x) {
        // remaining slots-1 values are distinct, > x, <= n
        const int rem = w - x;
        const int lo = (slots - 1) * x + (slots - 1) * slots / 2;
        if (rem < lo) break;
        int hi = 0;
        for (int j = 0; j < slots - 1; ++j) hi += n - j;
        if (rem > hi) continue;
        acc.push_back(x);
        const bool go = visit_fixed_count(n, rem, slots - 1, x + 1, acc, visit, budget, scratch);
        acc.pop_back();
        if (!go) return false;
    }
    return true;
}

}  // namespace

void enumerate_error_patterns(int n, std::uint64_t max_queries,
                              const std::function<bool(const ErrorPattern&)>& visit) {
    if (n < 1) throw std::invalid_argument("enumerate_error_patterns: n must be >= 1");
    if (max_queries == 0) return;
    std::uint64_t budget = max_queries;
    ErrorPattern scratch;
    // weight 0: the empty pattern
    scratch.flip_set.clear();
    scratch.weight = 0;
    --budget;
    if (!visit(scratch) || budget == 0) return;

    const int wmax = n * (n + 1) / 2;
    std::vector<int> acc;
    for (int w = 1; w <= wmax; ++w) {
        // minimal slot count: largest c with c(c+1)/2 <= w is an upper
        // bound; any c from 1 up can realize w if c(c+1)/2 <= w and the top
        // c values reach it
        for (int c = 1; c * (c + 1) / 2 <= w; ++c) {
            acc.clear();
            if (!visit_fixed_count(n, w, c, 1, acc, visit, budget, scratch)) return;
            if (budget == 0) return;
        }
    }
}

std::vector<ErrorPattern> ep_stream(int n, std::uint64_t max_queries) {
    std::vector<ErrorPattern> out;
    enumerate_error_patterns(n, max_queries, [&](const ErrorPattern& ep) {
        out.push_back(ep);
        return true;
    });
    return out;
}

LinearCode LinearCode::random_systematic(int n, int k, Rng& rng) {
    if (n < 1 || n > kSimNMax || k < 1 || k > n)
        throw std::invalid_argument("LinearCode: need 1 <= k <= n <= 64");
    LinearCode code;
    code.n = n;
    code.k = k;
    code.generator.resize(k);
    code.parity.resize(n - k);
    // G = [I_k | P] with i.i.d. uniform P; H = [P^T | I_{n-k}]
    std::vector<std::uint64_t> p_rows(k, 0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n - k; ++j)
            if (rng.bit()) p_rows[i] |= 1ULL << j;
    for (int i = 0; i < k; ++i)
        code.generator[i] = (1ULL << i) | (p_rows[i] << k);
    for (int j = 0; j < n - k; ++j) {
        std::uint64_t row = 1ULL << (k + j);
        for (int i = 0; i < k; ++i)
            if ((p_rows[i] >> j) & 1ULL) row |= 1ULL << i;
        code.parity[j] = row;
    }
    return code;
}

bool LinearCode::is_codeword(std::uint64_t word) const {
    for (std::uint64_t row : parity)
        if (popcount_parity(row & word)) return false;
    return true;
}

std::uint64_t LinearCode::encode(std::uint64_t message) const {
    std::uint64_t word = 0;
    for (int i = 0; i < k; ++i)
        if ((message >> i) & 1ULL) word ^= generator[i];
    return word;
}

std::optional<DecodeResult> orbgrand_decode(const LinearCode& code, std::span<const double> llrs,
                                            std::uint64_t max_queries) {
    if (static_cast<int>(llrs.size()) != code.n)
        throw std::invalid_argument("orbgrand_decode: llr length mismatch");
    const int n = code.n;
    std::vector<double> rel(n);
    std::uint64_t hard = 0;
    for (int i = 0; i < n; ++i) {
        rel[i] = std::abs(llrs[i]);
        if (llrs[i] < 0.0) hard |= 1ULL << i;  // sgn(0) = +1 -> bit 0
    }
    const auto r = ranks(rel);
    std::vector<int> pos_of_rank(n);
    for (int i = 0; i < n; ++i) pos_of_rank[r[i] - 1] = i;

    std::optional<DecodeResult> result;
    std::uint64_t queries = 0;
    enumerate_error_patterns(n, max_queries, [&](const ErrorPattern& ep) {
        ++queries;
        std::uint64_t cand = hard;
        for (int rank : ep.flip_set) cand ^= 1ULL << pos_of_rank[rank - 1];
        if (code.is_codeword(cand)) {
            result = DecodeResult{cand, queries};
            return false;
        }
        return true;
    });
    return result;
}

std::size_t ml_decode(std::span<const std::vector<int>> codebook, std::span<const double> llrs) {
    if (codebook.empty()) throw std::invalid_argument("ml_decode: empty codebook");
    std::size_t best = 0;
    double best_corr = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < codebook.size(); ++j) {
        const auto& cw = codebook[j];
        if (cw.size() != llrs.size()) throw std::invalid_argument("ml_decode: length mismatch");
        double corr = 0.0;
        for (std::size_t i = 0; i < cw.size(); ++i) corr += cw[i] * llrs[i];
        if (corr > best_corr) {
            best_corr = corr;
            best = j;
        }
    }
    return best;
}

namespace {

struct FrameCounts {
    std::uint64_t orb_errors = 0;
    std::uint64_t ml_errors = 0;
};

// one codebook, frames_per_codebook transmissions of message 1
FrameCounts run_codebook(const BinaryInputChannel& ch, int n, int m, int frames, Rng& rng,
                         bool track_ml) {
    // codeword j as a sign mask: bit set -> symbol -1
    std::vector<std::uint64_t> cw(m, 0);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i)
            if (rng.bit()) cw[j] |= 1ULL << i;

    std::vector<double> llr(n), rel(n);
    FrameCounts counts;
    for (int f = 0; f < frames; ++f) {
        std::uint64_t hard = 0;
        double corr0 = 0.0;
        for (int i = 0; i < n; ++i) {
            const int x = ((cw[0] >> i) & 1ULL) ? -1 : 1;
            const double y = ch.sample(x, rng);
            llr[i] = ch.llr(y);
            rel[i] = std::abs(llr[i]);
            if (llr[i] < 0.0) hard |= 1ULL << i;
            corr0 += x * llr[i];
        }
        const auto r = ranks(rel);
        auto rank_sum = [&](std::uint64_t mask) {
            std::uint64_t s = 0;
            while (mask) {
                const int i = std::countr_zero(mask);
                s += static_cast<std::uint64_t>(r[i]);
                mask &= mask - 1;
            }
            return s;
        };
        const std::uint64_t s0 = rank_sum(cw[0] ^ hard);
        bool orb_err = false;
        for (int j = 1; j < m && !orb_err; ++j)
            orb_err = rank_sum(cw[j] ^ hard) <= s0;
        counts.orb_errors += orb_err;

        if (track_ml) {
            bool ml_err = false;
            for (int j = 1; j < m && !ml_err; ++j) {
                double corr = 0.0;
                for (int i = 0; i < n; ++i) {
                    const int x = ((cw[j] >> i) & 1ULL) ? -1 : 1;
                    corr += x * llr[i];
                }
                // lowest index wins ties, so a later codeword must beat strictly
                ml_err = corr > corr0;
            }
            counts.ml_errors += ml_err;
        }
    }
    return counts;
}

std::vector<FrameCounts> run_ensemble(const BinaryInputChannel& ch, int n, int m, int codebooks,
                                      int frames, std::uint64_t seed, int threads, bool track_ml) {
    if (n < 1 || n > kSimNMax || m < 1 || m > kSimMMax)
        throw std::invalid_argument("ensemble simulation: need n <= 64 and M <= 65536");
    std::vector<FrameCounts> per_codebook(codebooks);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int cb = next.fetch_add(1);
            if (cb >= codebooks) return;
            Rng rng(seed, static_cast<std::uint64_t>(cb));
            per_codebook[cb] = run_codebook(ch, n, m, frames, rng, track_ml);
        }
    };
    int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads < 1) nthreads = 1;
    nthreads = std::min(nthreads, codebooks);
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return per_codebook;
}

}  // namespace

BoundEstimate simulate_ensemble_fer(const BinaryInputChannel& ch, int n, int m, int codebooks,
                                    int frames_per_codebook, std::uint64_t seed, int threads) {
    const auto counts =
        run_ensemble(ch, n, m, codebooks, frames_per_codebook, seed, threads, false);
    std::uint64_t errors = 0;
    for (const auto& c : counts) errors += c.orb_errors;
    const double frames =
        static_cast<double>(codebooks) * static_cast<double>(frames_per_codebook);
    const double fer = static_cast<double>(errors) / frames;
    BoundEstimate est;
    est.value = fer;
    est.half_width = 1.959963984540054 * std::sqrt(std::max(0.0, fer * (1.0 - fer)) / frames);
    est.samples = static_cast<std::uint64_t>(frames);
    est.seed = seed;
    est.method = Method::ensemble_fer_sim;
    return est;
}

PairedFer simulate_paired_ml_orb(const BinaryInputChannel& ch, int n, int m, int codebooks,
                                 int frames_per_codebook, std::uint64_t seed, int threads) {
    const auto counts = run_ensemble(ch, n, m, codebooks, frames_per_codebook, seed, threads, true);
    PairedFer out;
    out.frames_per_codebook = frames_per_codebook;
    out.orb_errors.reserve(counts.size());
    out.ml_errors.reserve(counts.size());
    for (const auto& c : counts) {
        out.orb_errors.push_back(c.orb_errors);
        out.ml_errors.push_back(c.ml_errors);
    }
    return out;
}

}  // namespace orbfb
