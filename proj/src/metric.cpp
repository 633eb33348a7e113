#include "orbfb/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace orbfb {

std::vector<std::int32_t> ranks(std::span<const double> reliabilities) {
    const std::size_t n = reliabilities.size();
    std::vector<std::int32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        return reliabilities[a] < reliabilities[b];
    });
    std::vector<std::int32_t> rank(n);
    for (std::size_t k = 0; k < n; ++k) rank[order[k]] = static_cast<std::int32_t>(k + 1);
    return rank;
}

MetricSample orb_metric(std::span<const int> codeword, std::span<const double> llrs) {
    if (codeword.size() != llrs.size())
        throw std::invalid_argument("orb_metric: codeword/llr length mismatch");
    const int n = static_cast<int>(llrs.size());
    std::vector<double> rel(llrs.size());
    for (std::size_t i = 0; i < llrs.size(); ++i) rel[i] = std::abs(llrs[i]);
    const auto r = ranks(rel);
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < llrs.size(); ++i) {
        const int sgn = llrs[i] >= 0.0 ? 1 : -1;
        if (sgn * codeword[i] < 0) s += static_cast<std::uint64_t>(r[i]);
    }
    return {s, static_cast<double>(s) / (static_cast<double>(n) * n), n};
}

MetricSample sample_transmitted_metric(const BinaryInputChannel& ch, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("sample_transmitted_metric: n must be >= 1");
    // only (Lambda_i, E_i) enter the metric: the rank sum over hard-decision
    // errors comes from one value sort plus a merge, no index permutation.
    // Exact reliability ties across positions have probability zero and may
    // resolve differently from the index rule in ranks(); the draw itself is
    // still deterministic given the rng state.
    thread_local std::vector<double> all;
    thread_local std::vector<double> errs;
    all.clear();
    errs.clear();
    for (int i = 0; i < n; ++i) {
        const SymbolDraw sd = draw_symbol(ch, rng);
        all.push_back(sd.lambda);
        if (sd.error) errs.push_back(sd.lambda);
    }
    std::sort(all.begin(), all.end());
    std::sort(errs.begin(), errs.end());
    std::uint64_t s = 0;
    std::size_t j = 0;
    for (double e : errs) {
        while (all[j] < e) ++j;
        s += j + 1;  // rank of this occurrence
        ++j;
    }
    return {s, static_cast<double>(s) / (static_cast<double>(n) * n), n};
}

HoeffdingDiagnostics hoeffding_diagnostics(const BinaryInputChannel& ch, int n, int reps,
                                           Rng& rng) {
    if (reps < 1) throw std::invalid_argument("hoeffding_diagnostics: reps must be >= 1");
    if (n < 2) throw std::invalid_argument("hoeffding_diagnostics: n must be >= 2");
    const double mu = compute_mu(ch);

    HoeffdingDiagnostics diag;
    diag.varsigma = mu;
    diag.g_values.reserve(static_cast<std::size_t>(n) * reps);
    diag.k_values.reserve(static_cast<std::size_t>(n) * reps);
    diag.m_n2.reserve(reps);

    std::vector<double> lam(n);
    std::vector<unsigned char> err(n);
    std::vector<std::int32_t> order(n);
    double mn_sum = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        for (int i = 0; i < n; ++i) {
            const SymbolDraw sd = draw_symbol(ch, rng);
            lam[i] = sd.lambda;
            err[i] = sd.error ? 1 : 0;
        }
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::int32_t a, std::int32_t b) { return lam[a] < lam[b]; });
        std::uint64_t s = 0;
        std::uint64_t err_count = 0;
        for (int k = 0; k < n; ++k) {
            if (err[order[k]]) s += static_cast<std::uint64_t>(k + 1);
            err_count += err[k];
        }
        const double dval = static_cast<double>(s) / (static_cast<double>(n) * n);
        // D = (1 - 1/n) M_n + r_{n,1} with r_{n,1} = (1/n^2) sum E_i inverts
        // to the order-2 U-statistic average M_n
        const double r_n1 = static_cast<double>(err_count) / (static_cast<double>(n) * n);
        const double m_n = (dval - r_n1) * n / (n - 1.0);

        double g_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g =
                0.5 * (err[i] * ch.reliability_cdf(lam[i]) + ch.error_reliability_tail(lam[i])) -
                mu;
            diag.g_values.push_back(g);
            diag.k_values.push_back(2.0 * g);
            g_sum += g;
        }
        const double m_n1 = 2.0 * g_sum / n;
        diag.m_n2.push_back(m_n - m_n1 - mu);
        mn_sum += m_n;
    }
    diag.varsigma_hat = mn_sum / reps;
    return diag;
}

}  // namespace orbfb
