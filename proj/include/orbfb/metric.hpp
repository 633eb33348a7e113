#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "orbfb/channel.hpp"
#include "orbfb/rng.hpp"

namespace orbfb {

// One evaluation of the ORBGRAND decoding metric. s is exact; d = s/n^2 is
// materialized in floating point only here, at the consumption boundary.
struct MetricSample {
    std::uint64_t s;  // sum of ranks over disagreement positions, in [0, n(n+1)/2]
    double d;         // s / n^2
    int n;
};

// Rank vector of the reliabilities: 1 for the smallest ... n for the largest.
// Ties (probability zero for continuous channels) break by ascending index.
std::vector<std::int32_t> ranks(std::span<const double> reliabilities);

// Metric of `codeword` (entries +-1) against the received LLRs; sgn(0) = +1.
MetricSample orb_metric(std::span<const int> codeword, std::span<const double> llrs);

// Draws X uniform on {+-1}^n and Y through the channel, returns the metric
// of the transmitted codeword.
MetricSample sample_transmitted_metric(const BinaryInputChannel& ch, int n, Rng& rng);

// Projection diagnostics of the metric's U-statistic decomposition; sample
// collections for test assertions.
struct HoeffdingDiagnostics {
    std::vector<double> g_values;    // first-order projections g(Z_i), one block per rep
    std::vector<double> k_values;    // K_i = 2 g(Z_i)
    std::vector<double> m_n2;       // degenerate second-order term, one per rep
    double varsigma_hat;             // sample estimate of the kernel mean
    double varsigma;                 // quadrature value (equals mu)
};

HoeffdingDiagnostics hoeffding_diagnostics(const BinaryInputChannel& ch, int n, int reps, Rng& rng);

}  // namespace orbfb
