#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "orbfb/channel.hpp"
#include "orbfb/codes.hpp"
#include "orbfb/metric.hpp"
#include "orbfb/tail.hpp"

using namespace orbfb;

namespace {

std::vector<int> to_bpsk(std::uint64_t word, int n) {
    std::vector<int> x(n);
    for (int i = 0; i < n; ++i) x[i] = bpsk_map((word >> i) & 1ULL);
    return x;
}

}  // namespace

TEST_CASE("error pattern stream opening for n = 3") {
    const auto eps = ep_stream(3, 5);
    REQUIRE(eps.size() == 5);
    CHECK(eps[0].flip_set.empty());
    CHECK(eps[1].flip_set == std::vector<int>{1});
    CHECK(eps[2].flip_set == std::vector<int>{2});
    CHECK(eps[3].flip_set == std::vector<int>{3});
    CHECK(eps[4].flip_set == std::vector<int>{1, 2});
    CHECK(eps[4].weight == 3);
}

TEST_CASE("error pattern weights are nondecreasing") {
    const auto eps = ep_stream(8, 1000);
    int prev = -1;
    for (const auto& ep : eps) {
        CHECK(ep.weight >= prev);
        prev = ep.weight;
        int sum = 0;
        for (std::size_t i = 0; i < ep.flip_set.size(); ++i) {
            sum += ep.flip_set[i];
            if (i) CHECK(ep.flip_set[i] > ep.flip_set[i - 1]);
        }
        CHECK(sum == ep.weight);
    }
}

TEST_CASE("stream exhausts exactly the 2^n patterns") {
    const auto eps = ep_stream(10, 1ULL << 20);
    CHECK(eps.size() == 1024);
}

TEST_CASE("stream matches an exhaustive subset oracle for n = 5") {
    // all subsets of {1..5}, ordered by (weight, count, lexicographic)
    std::vector<std::vector<int>> oracle;
    for (std::uint32_t mask = 0; mask < 32; ++mask) {
        std::vector<int> s;
        for (int i = 0; i < 5; ++i)
            if ((mask >> i) & 1U) s.push_back(i + 1);
        oracle.push_back(std::move(s));
    }
    auto weight_of = [](const std::vector<int>& s) {
        int w = 0;
        for (int v : s) w += v;
        return w;
    };
    std::stable_sort(oracle.begin(), oracle.end(),
                     [&](const std::vector<int>& a, const std::vector<int>& b) {
                         const int wa = weight_of(a), wb = weight_of(b);
                         if (wa != wb) return wa < wb;
                         if (a.size() != b.size()) return a.size() < b.size();
                         return a < b;
                     });
    const auto eps = ep_stream(5, 32);
    REQUIRE(eps.size() == 32);
    for (std::size_t i = 0; i < 32; ++i) CHECK(eps[i].flip_set == oracle[i]);
}

TEST_CASE("no duplicates in the first 1e5 patterns") {
    std::set<std::uint64_t> seen;
    std::uint64_t count = 0;
    enumerate_error_patterns(64, 100'000, [&](const ErrorPattern& ep) {
        std::uint64_t key = 0;
        for (int r : ep.flip_set) key |= 1ULL << (r - 1);
        CHECK(seen.insert(key).second);
        ++count;
        return true;
    });
    CHECK(count == 100'000);
}

TEST_CASE("random systematic codes satisfy G H^T = 0") {
    Rng rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto code = LinearCode::random_systematic(16, 8, rng);
        for (std::uint64_t msg = 0; msg < 256; ++msg) CHECK(code.is_codeword(code.encode(msg)));
        // a non-codeword: flip one bit of a codeword beyond the span
        CHECK_FALSE(code.is_codeword(code.encode(3) ^ (1ULL << 15) ^ (1ULL << 14) ^ 1ULL) ==
                    code.is_codeword(code.encode(3)));
    }
    CHECK_THROWS_AS(LinearCode::random_systematic(65, 5, rng), std::invalid_argument);
}

TEST_CASE("orbgrand decoder finds the transmitted codeword without noise") {
    Rng rng(21, 0);
    const auto code = LinearCode::random_systematic(12, 6, rng);
    const std::uint64_t word = code.encode(45);
    std::vector<double> llrs(12);
    for (int i = 0; i < 12; ++i) llrs[i] = 50.0 * bpsk_map((word >> i) & 1ULL);
    const auto res = orbgrand_decode(code, llrs, 1ULL << 12);
    REQUIRE(res.has_value());
    CHECK(res->word == word);
    CHECK(res->queries == 1);
}

TEST_CASE("single query succeeds exactly when the hard decision is a codeword") {
    Rng rng(22, 0);
    BpskAwgnChannel ch(0.0);
    const auto code = LinearCode::random_systematic(12, 6, rng);
    int successes = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint64_t word = code.encode(rng.next_u64() & 63);
        std::vector<double> llrs(12);
        std::uint64_t hard = 0;
        for (int i = 0; i < 12; ++i) {
            const double y = ch.sample(bpsk_map((word >> i) & 1ULL), rng);
            llrs[i] = ch.llr(y);
            if (llrs[i] < 0.0) hard |= 1ULL << i;
        }
        const auto res = orbgrand_decode(code, llrs, 1);
        CHECK(res.has_value() == code.is_codeword(hard));
        if (res) {
            CHECK(res->word == hard);
            CHECK(code.is_codeword(res->word));
            ++successes;
        }
    }
    CHECK(successes > 0);
}

TEST_CASE("decoder output metric equals the brute-force codebook minimum") {
    Rng rng(23, 0);
    BpskAwgnChannel ch(0.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto code = LinearCode::random_systematic(12, 6, rng);
        const std::uint64_t word = code.encode(rng.next_u64() & 63);
        std::vector<double> llrs(12);
        for (int i = 0; i < 12; ++i)
            llrs[i] = ch.llr(ch.sample(bpsk_map((word >> i) & 1ULL), rng));

        const auto res = orbgrand_decode(code, llrs, 1ULL << 12);
        REQUIRE(res.has_value());  // untruncated walk always terminates
        CHECK(code.is_codeword(res->word));

        std::uint64_t best = ~0ULL;
        for (std::uint64_t msg = 0; msg < 64; ++msg)
            best = std::min(best, orb_metric(to_bpsk(code.encode(msg), 12), llrs).s);
        CHECK(orb_metric(to_bpsk(res->word, 12), llrs).s == best);

        // rank-based: positive scaling changes nothing
        std::vector<double> scaled(llrs);
        for (auto& v : scaled) v *= 123.45;
        const auto res2 = orbgrand_decode(code, scaled, 1ULL << 12);
        REQUIRE(res2.has_value());
        CHECK(res2->word == res->word);
        CHECK(res2->queries == res->queries);
    }
}

TEST_CASE("ml_decode basics") {
    std::vector<std::vector<int>> codebook{{+1, +1, -1}, {-1, +1, -1}, {+1, -1, +1}};
    CHECK(ml_decode(codebook, std::vector<double>{4.0, 3.0, -2.0}) == 0);
    CHECK(ml_decode(codebook, std::vector<double>{-4.0, 3.0, -2.0}) == 1);
    std::vector<std::vector<int>> single{{+1, -1}};
    CHECK(ml_decode(single, std::vector<double>{-9.0, 4.0}) == 0);
    CHECK_THROWS_AS(ml_decode(std::span<const std::vector<int>>{}, std::vector<double>{1.0}),
                    std::invalid_argument);
}

TEST_CASE("ensemble simulation corners") {
    BpskAwgnChannel quiet(40.0);
    CHECK(simulate_ensemble_fer(quiet, 16, 1, 10, 50, 1).value == 0.0);
    CHECK(simulate_ensemble_fer(quiet, 16, 256, 20, 100, 2).value < 1e-3);
    CHECK_THROWS_AS(simulate_ensemble_fer(quiet, 65, 4, 1, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(simulate_ensemble_fer(quiet, 16, 1 << 17, 1, 1, 3), std::invalid_argument);

    // reproducible given the seed, regardless of threading
    BpskAwgnChannel ch(0.0);
    const auto a = simulate_ensemble_fer(ch, 12, 64, 50, 200, 99, 1);
    const auto b = simulate_ensemble_fer(ch, 12, 64, 50, 200, 99, 2);
    CHECK(a.value == b.value);
    CHECK(a.samples == b.samples);
}

TEST_CASE("ensemble FER sits below the union bound") {
    BpskAwgnChannel ch(0.0);
    const int n = 12, m = 64;
    const auto fer = simulate_ensemble_fer(ch, n, m, 100, 1000, 424242);
    const auto table = exact_cdf_table(n);
    McOptions opt;
    opt.samples = 500'000;
    opt.seed = 31337;
    const auto bound = orb_rcu(ch, OperatingPoint::from_m(n, m), table, opt);
    const double se_fer = fer.half_width / 1.959963984540054;
    const double se_bound = bound.half_width / 1.959963984540054;
    const double slack = 3.0 * std::sqrt(se_fer * se_fer + se_bound * se_bound);
    MESSAGE("fer=", fer.value, " bound=", bound.value, " slack=", slack);
    CHECK(fer.value <= bound.value + slack);
}

TEST_CASE("paired ML never loses to the rank metric") {
    BpskAwgnChannel ch(0.0);
    const int codebooks = 200, frames = 500;
    const auto paired = simulate_paired_ml_orb(ch, 12, 64, codebooks, frames, 13579);
    REQUIRE(paired.orb_errors.size() == static_cast<std::size_t>(codebooks));

    double mean_diff = 0.0, m2 = 0.0;
    for (int c = 0; c < codebooks; ++c) {
        const double d = (static_cast<double>(paired.ml_errors[c]) -
                          static_cast<double>(paired.orb_errors[c])) /
                         frames;
        mean_diff += d;
    }
    mean_diff /= codebooks;
    for (int c = 0; c < codebooks; ++c) {
        const double d = (static_cast<double>(paired.ml_errors[c]) -
                          static_cast<double>(paired.orb_errors[c])) /
                         frames;
        m2 += (d - mean_diff) * (d - mean_diff);
    }
    const double se = std::sqrt(m2 / codebooks / codebooks);
    MESSAGE("ml - orb fer diff = ", mean_diff, " se = ", se);
    CHECK(mean_diff <= 2.0 * se);
}
