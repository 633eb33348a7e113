#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "orbfb/bounds.hpp"
#include "orbfb/channel.hpp"
#include "orbfb/rng.hpp"

namespace orbfb {

// Systematic binary linear code, n <= 64, rows as bit masks (bit i = column
// i). BPSK map: bit 0 -> +1, bit 1 -> -1. G H^T = 0 by construction.
struct LinearCode {
    int n = 0;
    int k = 0;
    std::vector<std::uint64_t> generator;  // k rows [I | P]
    std::vector<std::uint64_t> parity;     // n-k rows [P^T | I]

    static LinearCode random_systematic(int n, int k, Rng& rng);

    bool is_codeword(std::uint64_t word) const;
    std::uint64_t encode(std::uint64_t message) const;
};

inline int bpsk_map(int bit) { return bit == 0 ? 1 : -1; }

// Set of rank values (distinct, in 1..n) whose positions get flipped in one
// query; weight is their sum (the logistic weight).
struct ErrorPattern {
    std::vector<int> flip_set;  // strictly increasing
    int weight = 0;
};

// Emits error patterns in nondecreasing weight; within equal weight fewer
// flips first, then lexicographically on the sorted rank lists. The first
// pattern is the empty set. Stops after max_queries patterns or when visit
// returns false.
void enumerate_error_patterns(int n, std::uint64_t max_queries,
                              const std::function<bool(const ErrorPattern&)>& visit);

// Eager convenience form of the above.
std::vector<ErrorPattern> ep_stream(int n, std::uint64_t max_queries);

struct DecodeResult {
    std::uint64_t word = 0;     // decoded codeword bits (bit i = position i)
    std::uint64_t queries = 0;  // queries spent (1 = hard decision hit)
};

// Reliability-ordered guessing decode: walks the error-pattern stream over
// rank positions and syndrome-checks each candidate. Empty result after
// max_queries failed queries.
std::optional<DecodeResult> orbgrand_decode(const LinearCode& code, std::span<const double> llrs,
                                            std::uint64_t max_queries);

// Exact ML over an explicit codebook: argmax of sum_i x_i llr_i (the
// per-symbol log-likelihoods enter only through the LLRs); lowest index wins
// ties. Codebook entries are +-1 vectors.
std::size_t ml_decode(std::span<const std::vector<int>> codebook, std::span<const double> llrs);

// Ensemble-average frame error rate of metric-minimization decoding over
// i.i.d. uniform +-1 codebooks; message 1 transmitted, metric ties counted
// as errors. Guarded to M <= 2^16, n <= 64.
BoundEstimate simulate_ensemble_fer(const BinaryInputChannel& ch, int n, int m, int codebooks,
                                    int frames_per_codebook, std::uint64_t seed, int threads = 0);

// Paired per-codebook error counts for the ML-vs-ORBGRAND comparison.
struct PairedFer {
    std::vector<std::uint64_t> orb_errors;  // one entry per codebook
    std::vector<std::uint64_t> ml_errors;
    int frames_per_codebook = 0;
};
PairedFer simulate_paired_ml_orb(const BinaryInputChannel& ch, int n, int m, int codebooks,
                                 int frames_per_codebook, std::uint64_t seed, int threads = 0);

}  // namespace orbfb
