#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace orbfb {

// Exact CDF of zeta_n = sum_{i=1..n} i B_i over its integer support
// [0, n(n+1)/2], with B_i i.i.d. fair Bernoulli. Linear-domain doubles up to
// n = 900; log-domain beyond (the smallest mass 2^{-n} underflows near
// n ~ 1074).
class TailTable {
public:
    enum class Mode : std::uint8_t { linear = 0, log = 1 };

    int n() const { return n_; }
    Mode mode() const { return mode_; }
    std::uint64_t support_max() const {
        return static_cast<std::uint64_t>(n_) * (n_ + 1) / 2;
    }

    // Pr[zeta_n <= s]; throws std::out_of_range outside the support.
    double cdf(std::uint64_t s) const;
    // ln Pr[zeta_n <= s]
    double log_cdf(std::uint64_t s) const;

    const std::vector<double>& data() const { return table_; }

    void save(const std::string& path) const;
    static TailTable load(const std::string& path);

    friend TailTable exact_cdf_table(int n, std::optional<Mode> force_mode);

private:
    int n_ = 0;
    Mode mode_ = Mode::linear;
    std::vector<double> table_;  // cdf (linear) or log-cdf (log), size T+1
};

// Builds the table by n convolution steps new[s] = (old[s] + old[s-i]) / 2,
// O(n^3) time and O(n^2) space. Guarded to 1 <= n <= 5000. The domain mode
// follows the n = 900 switch unless forced (linear is exact-enough below the
// switch; the log-sum-exp path never underflows above it).
TailTable exact_cdf_table(int n, std::optional<TailTable::Mode> force_mode = {});

// Pr[zeta_n <= s] for probe/test use.
double lookup(const TailTable& table, std::uint64_t s);

// Strong large-deviation approximation A(d) e^{-n I(d)} / sqrt(n) of
// F_{zeta_n}(n^2 d). Requires d in the guarded saddlepoint domain and
// d <= 0.2499 (the prefactor degrades as d -> 1/4).
double ld_cdf(int n, double d);
double ld_log_cdf(int n, double d);

// Memoizing store; optionally persists tables under cache_dir using the
// ZTAB binary format.
class TailTableCache {
public:
    explicit TailTableCache(std::string cache_dir = "");
    std::shared_ptr<const TailTable> get(int n);

private:
    std::string dir_;
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

}  // namespace orbfb
