#include "orbfb/tail.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "orbfb/saddlepoint.hpp"

namespace orbfb {
namespace {

constexpr int kLinearModeMax = 900;
constexpr int kTableNMax = 5000;
constexpr char kMagic[4] = {'Z', 'T', 'A', 'B'};
constexpr std::uint32_t kVersion = 1;

double log_add(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

}  // namespace

double TailTable::cdf(std::uint64_t s) const {
    if (s >= table_.size()) throw std::out_of_range("TailTable::cdf: s outside support");
    return mode_ == Mode::linear ? table_[s] : std::exp(table_[s]);
}

double TailTable::log_cdf(std::uint64_t s) const {
    if (s >= table_.size()) throw std::out_of_range("TailTable::log_cdf: s outside support");
    return mode_ == Mode::linear ? std::log(table_[s]) : table_[s];
}

TailTable exact_cdf_table(int n, std::optional<TailTable::Mode> force_mode) {
    if (n < 1 || n > kTableNMax)
        throw std::invalid_argument("exact_cdf_table: n outside [1, 5000]");
    const std::uint64_t T = static_cast<std::uint64_t>(n) * (n + 1) / 2;
    TailTable t;
    t.n_ = n;
    t.mode_ = force_mode.value_or(n <= kLinearModeMax ? TailTable::Mode::linear
                                                      : TailTable::Mode::log);
    if (t.mode_ == TailTable::Mode::linear && n > 1074)
        throw std::invalid_argument("exact_cdf_table: linear mode underflows for n > 1074");

    if (t.mode_ == TailTable::Mode::linear) {
        auto& pmf = t.table_;
        pmf.assign(T + 1, 0.0);
        pmf[0] = 1.0;
        std::uint64_t top = 0;
        for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(n); ++i) {
            top += i;
            // descending s keeps pmf[s - i] at the previous step's value
            for (std::uint64_t s = top; s >= i; --s) pmf[s] = 0.5 * (pmf[s] + pmf[s - i]);
            for (std::uint64_t s = i; s-- > 0;) pmf[s] *= 0.5;
        }
        // prefix sums, then pin the final entry to exactly 1
        double acc = 0.0;
        for (auto& v : pmf) {
            acc += v;
            v = acc;
        }
        if (std::abs(acc - 1.0) > 1e-9)
            throw std::runtime_error("exact_cdf_table: mass check failed");
        pmf[T] = 1.0;
    } else {
        const double neg_inf = -std::numeric_limits<double>::infinity();
        auto& lpmf = t.table_;
        lpmf.assign(T + 1, neg_inf);
        lpmf[0] = 0.0;
        std::uint64_t top = 0;
        for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(n); ++i) {
            top += i;
            for (std::uint64_t s = top; s >= i; --s)
                lpmf[s] = log_add(lpmf[s], lpmf[s - i]) - std::numbers::ln2;
            for (std::uint64_t s = i; s-- > 0;) lpmf[s] -= std::numbers::ln2;
        }
        double acc = neg_inf;
        for (auto& v : lpmf) {
            acc = log_add(acc, v);
            v = acc;
        }
        if (std::abs(acc) > 1e-6)
            throw std::runtime_error("exact_cdf_table: log-domain mass check failed");
        lpmf[T] = 0.0;
    }
    return t;
}

double lookup(const TailTable& table, std::uint64_t s) { return table.cdf(s); }

double ld_log_cdf(int n, double d) {
    if (d > 0.2499)
        throw std::domain_error(
            "ld_cdf: prefactor degrades for d > 0.2499 (theta_d -> 0 singularity)");
    const SaddlepointSolution sol = solve_saddlepoint(d);
    return std::log(sol.prefactor) - n * sol.rate - 0.5 * std::log(static_cast<double>(n));
}

double ld_cdf(int n, double d) { return std::exp(ld_log_cdf(n, d)); }

void TailTable::save(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("TailTable::save: cannot open " + path);
    const std::uint32_t n32 = static_cast<std::uint32_t>(n_);
    const std::uint8_t mode8 = static_cast<std::uint8_t>(mode_);
    bool ok = std::fwrite(kMagic, 1, 4, f) == 4 &&
              std::fwrite(&kVersion, sizeof kVersion, 1, f) == 1 &&
              std::fwrite(&n32, sizeof n32, 1, f) == 1 &&
              std::fwrite(&mode8, sizeof mode8, 1, f) == 1 &&
              std::fwrite(table_.data(), sizeof(double), table_.size(), f) == table_.size();
    ok = std::fclose(f) == 0 && ok;
    if (!ok) throw std::runtime_error("TailTable::save: write failed for " + path);
}

TailTable TailTable::load(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("TailTable::load: cannot open " + path);
    char magic[4];
    std::uint32_t version = 0, n32 = 0;
    std::uint8_t mode8 = 0;
    bool ok = std::fread(magic, 1, 4, f) == 4 && std::memcmp(magic, kMagic, 4) == 0 &&
              std::fread(&version, sizeof version, 1, f) == 1 && version == kVersion &&
              std::fread(&n32, sizeof n32, 1, f) == 1 &&
              std::fread(&mode8, sizeof mode8, 1, f) == 1;
    TailTable t;
    if (ok) {
        t.n_ = static_cast<int>(n32);
        t.mode_ = static_cast<Mode>(mode8);
        t.table_.resize(t.support_max() + 1);
        ok = std::fread(t.table_.data(), sizeof(double), t.table_.size(), f) == t.table_.size();
    }
    std::fclose(f);
    if (!ok) throw std::runtime_error("TailTable::load: bad or truncated file " + path);
    return t;
}

struct TailTableCache::Impl {
    std::mutex mtx;
    std::map<int, std::shared_ptr<const TailTable>> mem;
};

TailTableCache::TailTableCache(std::string cache_dir)
    : dir_(std::move(cache_dir)), impl_(std::make_shared<Impl>()) {}

std::shared_ptr<const TailTable> TailTableCache::get(int n) {
    {
        std::lock_guard lock(impl_->mtx);
        auto it = impl_->mem.find(n);
        if (it != impl_->mem.end()) return it->second;
    }
    std::string path;
    if (!dir_.empty()) {
        const char* mode = n <= kLinearModeMax ? "lin" : "log";
        path = dir_ + "/ztab_n" + std::to_string(n) + "_" + mode + ".bin";
        if (std::filesystem::exists(path)) {
            auto t = std::make_shared<TailTable>(TailTable::load(path));
            std::lock_guard lock(impl_->mtx);
            impl_->mem.emplace(n, t);
            return t;
        }
    }
    auto t = std::make_shared<TailTable>(exact_cdf_table(n));
    if (!dir_.empty()) {
        std::filesystem::create_directories(dir_);
        t->save(path);
    }
    std::lock_guard lock(impl_->mtx);
    impl_->mem.emplace(n, t);
    return t;
}

}  // namespace orbfb
