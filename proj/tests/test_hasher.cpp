#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "vlx/errors.hpp"
#include "vlx/hasher.hpp"

using namespace vlx;

TEST_CASE("planner arithmetic") {
    auto [k1, a1] = plan_params(64, std::exp2(-10.0));
    CHECK(k1 == 84);
    CHECK(a1 == doctest::Approx(0.3125));

    auto [k2, a2] = plan_params(6, 1.0 / 16.0);
    CHECK(k2 == 14);
    CHECK(a2 == doctest::Approx(8.0 / 6.0));

    auto [k3, a3] = plan_params(5, 1.0);
    CHECK(k3 == 5); // no extraction needed at the eps = 1 boundary
    CHECK(a3 == 0.0);

    CHECK_THROWS_AS(plan_params(5, 0.0), ConfigError);
    CHECK_THROWS_AS(plan_params(5, -0.25), ConfigError);
    CHECK_THROWS_AS(plan_params(0, 0.5), ConfigError);
}

TEST_CASE("spec validation") {
    ExtractorSpec good{8, 4, 8, 0.25};
    good.validate();
    CHECK(good.seed_length() == 11);

    ExtractorSpec thin{8, 6, 8, 0.25}; // 6 > 8 - 2*log2(4)
    CHECK_THROWS_AS(thin.validate(), ConfigError);
    ExtractorSpec wide{4, 6, 4, 0.5};
    CHECK_THROWS_AS(wide.validate(), ConfigError);
}

TEST_CASE("toeplitz fixtures") {
    CHECK(toeplitz_extract(BitSequence::from_string("1"), BitSequence::from_string("1"), 1).to_string() == "1");

    // n=2, m=1: the single row is [seed[1], seed[0]]
    CHECK(toeplitz_extract(BitSequence::from_string("11"), BitSequence::from_string("10"), 1).to_string() == "1");
    CHECK(toeplitz_extract(BitSequence::from_string("10"), BitSequence::from_string("10"), 1).to_string() == "0");
    CHECK(toeplitz_extract(BitSequence::from_string("01"), BitSequence::from_string("10"), 1).to_string() == "1");

    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        BitSequence seed = rng.bits(12 + 5 - 1);
        CHECK(toeplitz_extract(BitSequence::zeros(12), seed, 5) == BitSequence::zeros(5));
    }
    CHECK_THROWS_AS(toeplitz_extract(BitSequence::zeros(4), BitSequence::zeros(9), 3), ConfigError);
}

TEST_CASE("toeplitz is linear in the input") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng.below(20), m = 1 + rng.below(n);
        BitSequence seed = rng.bits(n + m - 1);
        BitSequence z1 = rng.bits(n), z2 = rng.bits(n);
        BitSequence zsum;
        for (std::size_t i = 0; i < n; ++i) zsum.push_back(z1[i] ^ z2[i]);
        BitSequence y1 = toeplitz_extract(z1, seed, m);
        BitSequence y2 = toeplitz_extract(z2, seed, m);
        BitSequence ysum = toeplitz_extract(zsum, seed, m);
        for (std::size_t i = 0; i < m; ++i) CHECK(ysum[i] == (y1[i] ^ y2[i]));
    }
}

TEST_CASE("row masks agree with the reference implementation") {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 1 + rng.below(32), m = 1 + rng.below(std::min<std::size_t>(n, 16));
        std::size_t L = n + m - 1;
        std::uint64_t seed_word = rng.word() & ((L == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << L) - 1));
        BitSequence seed;
        for (std::size_t t = 0; t < L; ++t) seed.push_back(static_cast<int>((seed_word >> t) & 1u));
        BitSequence z = rng.bits(n);
        std::uint64_t zword = 0;
        for (std::size_t j = 0; j < n; ++j) zword |= static_cast<std::uint64_t>(z[j]) << j;

        std::vector<std::uint64_t> rows(m);
        toeplitz_rows_u64(seed_word, n, m, rows.data());
        BitSequence want = toeplitz_extract(z, seed, m);
        for (std::size_t i = 0; i < m; ++i)
            CHECK(static_cast<int>(__builtin_parityll(rows[i] & zword)) == want[i]);
    }
}

TEST_CASE("seed handling") {
    ExtractorSpec spec{8, 4, 8, 0.25};
    CHECK(spec.seed_length() == 11);

    Rng a(99), b(99);
    CHECK(draw_seed(spec, a) == draw_seed(spec, b));

    BitSequence s = seed_from_hex("a5b", 11);
    CHECK(s.size() == 11);
    CHECK(s.to_string() == "10100101101"); // first 11 bits of a5b
    CHECK(seed_to_hex(s) == "a5a"); // trailing pad bit dropped on re-encode

    BitSequence full = seed_from_hex("0f3a", 16);
    CHECK(seed_to_hex(full) == "0f3a");

    CHECK_THROWS_WITH_AS(seed_from_hex("a5", 11), doctest::Contains("seed length"), ConfigError);
    CHECK_THROWS_AS(seed_from_hex("xyz", 11), ConfigError);
}

TEST_CASE("flat-source leftover hash check at one small configuration") {
    // n = 8, k = 6, eps = 1/4, m = k - 2*log2(1/eps) = 2; exact seed average
    const std::size_t n = 8, m = 2;
    const std::size_t k = 6;
    const double eps = 0.25;
    const std::size_t L = n + m - 1;
    Rng rng(31415);
    for (int source = 0; source < 5; ++source) {
        // random flat source: uniform over 2^k distinct n-bit words
        std::set<std::uint64_t> support;
        while (support.size() < (std::size_t{1} << k)) support.insert(rng.below(std::uint64_t{1} << n));
        double mean_tv = 0.0;
        std::vector<double> bins(std::size_t{1} << m);
        for (std::uint64_t seed = 0; seed < (std::uint64_t{1} << L); ++seed) {
            std::fill(bins.begin(), bins.end(), 0.0);
            std::vector<std::uint64_t> rows(m);
            toeplitz_rows_u64(seed, n, m, rows.data());
            for (std::uint64_t z : support) {
                std::size_t y = 0;
                for (std::size_t i = 0; i < m; ++i)
                    y |= static_cast<std::size_t>(__builtin_parityll(rows[i] & z)) << i;
                bins[y] += 1.0 / static_cast<double>(std::size_t{1} << k);
            }
            double tv = 0.0;
            for (double p : bins) tv += std::abs(p - 0.25);
            mean_tv += 0.5 * tv;
        }
        mean_tv /= static_cast<double>(std::uint64_t{1} << L);
        CHECK(mean_tv <= eps);
    }
}
