#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>

#include "vlx/frontends.hpp"
#include "vlx/models.hpp"

using namespace vlx;

namespace {

// conservation: P(x) = P(x.0) + P(x.1) for every prefix up to max_len
void check_conservation(const SourceModel& model, std::size_t max_len) {
    Rng rng(5150);
    for (int trial = 0; trial < 64; ++trial) {
        std::size_t len = rng.below(max_len);
        BitSequence x = model.sample(rng, len);
        double p = model.prob(x);
        BitSequence x0 = x, x1 = x;
        x0.push_back(0);
        x1.push_back(1);
        CHECK(std::abs(model.prob(x0) + model.prob(x1) - p) <= 1e-12);
    }
    CHECK(model.prob(BitSequence()) == 1.0);
}

} // namespace

TEST_CASE("coin probabilities multiply per bit") {
    CoinModel coin(0.8);
    CHECK(coin.prob(BitSequence::from_string("110")) == doctest::Approx(0.128).epsilon(1e-12));
    CHECK(coin.prob(BitSequence()) == 1.0);
}

TEST_CASE("probability flow conservation across model kinds") {
    check_conservation(CoinModel(0.8), 16);
    check_conservation(ProductModel({0.9, 0.8, 0.7}), 16);
    check_conservation(MarkovModel({0.5, 0.5}, {0.9, 0.1}, {0.2, 0.8}), 16);
    check_conservation(IntervalCoinModel(0.8, 0.82, IntervalPolicy::Alternating), 16);
    check_conservation(IntervalCoinModel(0.9, 0.91, IntervalPolicy::Worst), 16);

    std::vector<std::pair<BitSequence, double>> table = {
        {BitSequence::from_string("00"), 0.25},
        {BitSequence::from_string("01"), 0.25},
        {BitSequence::from_string("1"), 0.5},
    };
    check_conservation(ExplicitModel(std::move(table)), 6);
}

TEST_CASE("degenerate coins sample deterministically") {
    Rng rng(1);
    CHECK(CoinModel(1.0).sample(rng, 50) == BitSequence::from_string(std::string(50, '1')));
    CHECK(CoinModel(0.0).sample(rng, 50) == BitSequence::from_string(std::string(50, '0')));
}

TEST_CASE("sampling matches the coin bias at large counts") {
    Rng rng(2024);
    CoinModel coin(0.8);
    BitSequence s = coin.sample(rng, 100000);
    double freq = static_cast<double>(s.count_ones()) / s.size();
    CHECK(std::abs(freq - 0.8) < 0.01);
}

TEST_CASE("sampling is deterministic under a fixed rng state") {
    MarkovModel markov({0.5, 0.5}, {0.9, 0.1}, {0.2, 0.8});
    Rng a(7), b(7);
    CHECK(markov.sample(a, 300) == markov.sample(b, 300));
}

TEST_CASE("divergence of a model against itself is zero") {
    CoinModel coin(0.7);
    std::vector<BitSequence> sp;
    for (std::uint64_t v = 0; v < 16; ++v) sp.push_back(BitSequence::from_u64(v, 4));
    DivergenceReport rep = divergence_dp(coin, coin, sp);
    CHECK(std::abs(rep.d_p) <= 1e-12);
    CHECK(rep.set_size == 16);
}

TEST_CASE("divergence of coin 0.6 against coin 0.5 is log2(1.2)") {
    CoinModel r(0.6), m(0.5);
    for (std::size_t n = 1; n <= 12; n += 3) {
        std::vector<BitSequence> sp;
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) sp.push_back(BitSequence::from_u64(v, n));
        DivergenceReport rep = divergence_dp(r, m, sp);
        CHECK(rep.d_p == doctest::Approx(std::log2(1.2)).epsilon(1e-12));
        CHECK(rep.argmax == BitSequence::from_string(std::string(n, '1')));
    }
}

TEST_CASE("divergence is nonnegative over complete prefix-free sets") {
    CoinModel m(0.5);
    CoinModel r1(0.83);
    MarkovModel r2({0.4, 0.6}, {0.7, 0.3}, {0.35, 0.65});
    IntervalCoinModel r3(0.4, 0.6, IntervalPolicy::Alternating);
    std::vector<const SourceModel*> rs = {&r1, &r2, &r3};
    std::vector<BitSequence> sp;
    for (std::uint64_t v = 0; v < 256; ++v) sp.push_back(BitSequence::from_u64(v, 8));
    for (const SourceModel* r : rs) CHECK(divergence_dp(*r, m, sp).d_p >= -1e-12);
}

TEST_CASE("divergence error branches") {
    std::vector<std::pair<BitSequence, double>> table = {
        {BitSequence::from_string("0"), 1.0},
    };
    ExplicitModel degenerate(std::move(table)); // P(1) = 0, P(0) = 1
    CoinModel fair(0.5);
    std::vector<BitSequence> sp = {BitSequence::from_string("1")};
    CHECK_THROWS_AS(divergence_dp(fair, degenerate, sp), DomainError);
    std::vector<BitSequence> sp0 = {BitSequence::from_string("0")};
    CHECK_THROWS_AS(divergence_dp(fair, degenerate, sp0), DomainError);
    CHECK_THROWS_AS(divergence_dp(fair, fair, std::vector<BitSequence>{}), ConfigError);
}

TEST_CASE("worst-case interval against a reference coin: per-symbol formula") {
    // the zero-heavy endpoint dominates for [0.8, 0.82] vs q = 0.8132
    double d = interval_coin_divergence(0.8, 0.82, 0.8132);
    double f0 = std::log2(0.2 / 0.1868) / std::log2(1.0 / 0.1868);
    CHECK(d == doctest::Approx(f0).epsilon(1e-12));
    CHECK(std::abs(d - 0.0405) < 0.0005);
}

TEST_CASE("sequence-level divergence of adversary policies matches the formula") {
    IntervalCoinModel lo(0.8, 0.82, IntervalPolicy::ConstantLo);
    IntervalCoinModel hi(0.8, 0.82, IntervalPolicy::ConstantHi);
    IntervalCoinModel worst(0.8, 0.82, IntervalPolicy::Worst);
    CoinModel m(0.8132);
    double formula = interval_coin_divergence(0.8, 0.82, 0.8132);
    for (std::size_t n : {4u, 8u, 12u}) {
        std::vector<BitSequence> sp;
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << n); ++v) sp.push_back(BitSequence::from_u64(v, n));
        // the class-wide worst case is attained by one of the constant
        // endpoint members, and single-symbol ratios bound every member
        double class_max = std::max(divergence_dp(lo, m, sp).d_p, divergence_dp(hi, m, sp).d_p);
        CHECK(class_max == doctest::Approx(formula).epsilon(1e-9));
        DivergenceReport rep = divergence_dp(worst, m, sp);
        CHECK(rep.d_p <= formula + 1e-9);
        CHECK(std::abs(rep.d_p - 0.0405) < 0.005);
    }
}

TEST_CASE("optimal coin fixtures") {
    OptimalCoin exact = optimal_coin_model(0.75, 0.75);
    CHECK(exact.q == 0.75);
    CHECK(exact.beta == 0.0);

    OptimalCoin narrow = optimal_coin_model(0.9, 0.91);
    CHECK(std::abs(narrow.beta - 0.0315) < 0.0005);
    CHECK(narrow.q > 0.9);
    CHECK(narrow.q < 0.91);

    OptimalCoin wide = optimal_coin_model(0.8, 0.82);
    CHECK(std::abs(wide.beta - 0.0405) < 0.0005);

    CHECK_THROWS_AS(optimal_coin_model(0.9, 0.8), ConfigError);
}

TEST_CASE("optimal coin beats both endpoints as models") {
    OptimalCoin oc = optimal_coin_model(0.8, 0.82);
    CHECK(oc.beta <= interval_coin_divergence(0.8, 0.82, 0.8) + 1e-12);
    CHECK(oc.beta <= interval_coin_divergence(0.8, 0.82, 0.82) + 1e-12);
}

TEST_CASE("fixed-length baseline reproduces the published band") {
    EfficiencyInterval band = fixed_length_baseline(0.9, 0.91);
    CHECK(std::abs(band.lo - 0.2901) < 0.0005);
    CHECK(std::abs(band.hi - 0.3117) < 0.0005);
    CHECK(band.lo == doctest::Approx(std::log2(1.0 / 0.91) / 0.46899559).epsilon(1e-6));
}

TEST_CASE("grouping with beta 0 returns the base restriction") {
    CoinModel coin(0.8);
    std::vector<BitSequence> sp;
    for (std::uint64_t v = 0; v < 16; ++v) sp.push_back(BitSequence::from_u64(v, 4));
    GroupingSource g = grouping_source(coin, sp, 0.0);
    CHECK(g.groups.size() == sp.size());
    for (const auto& x : sp) CHECK(g.model->prob(x) == doctest::Approx(coin.prob(x)).epsilon(1e-12));
}

TEST_CASE("grouping the fair coin at beta 0.5 gives two half atoms") {
    CoinModel fair(0.5);
    std::vector<BitSequence> sp;
    for (std::uint64_t v = 0; v < 4; ++v) sp.push_back(BitSequence::from_u64(v, 2));
    GroupingSource g = grouping_source(fair, sp, 0.5);
    REQUIRE(g.groups.size() == 2);
    CHECK(g.groups[0].size() == 2);
    CHECK(g.groups[1].size() == 2);
    // entropy of the merged source is exactly (1-beta) * 2 = 1 bit
    double h = 0.0;
    for (const auto& [word, mass] : g.model->table())
        if (mass > 0.0) h += -mass * std::log2(mass);
    CHECK(h == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("grouping entropy obeys the (1-beta) collapse with finite slack") {
    CoinModel coin(0.8);
    std::vector<BitSequence> sp;
    for (std::uint64_t v = 0; v < 64; ++v) sp.push_back(BitSequence::from_u64(v, 6));
    double h_m = 6.0 * (0.8 * std::log2(1.0 / 0.8) + 0.2 * std::log2(1.0 / 0.2));
    for (double beta : {0.2, 0.5}) {
        GroupingSource g = grouping_source(coin, sp, beta);
        double h_r = 0.0;
        for (const auto& [word, mass] : g.model->table())
            if (mass > 0.0) h_r += -mass * std::log2(mass);
        CHECK(h_r <= (1.0 - beta) * h_m * 1.1);
        CHECK(h_r <= (1.0 - beta) * h_m + 2.0);
        // divergence against the base stays within beta
        DivergenceReport rep = divergence_dp(*g.model, coin, sp);
        CHECK(rep.d_p <= beta + 1e-9);
    }
}

TEST_CASE("grouping masses stay within the leader window") {
    CoinModel coin(0.75);
    std::vector<BitSequence> sp;
    for (std::uint64_t v = 0; v < 32; ++v) sp.push_back(BitSequence::from_u64(v, 5));
    double beta = 0.3;
    GroupingSource g = grouping_source(coin, sp, beta);
    double total = 0.0;
    for (std::size_t gi = 0; gi + 1 < g.groups.size(); ++gi) { // last group may be short
        const auto& group = g.groups[gi];
        double leader_p = coin.prob(g.sorted[group.front()]);
        double mass = 0.0;
        for (std::size_t idx : group) mass += coin.prob(g.sorted[idx]);
        CHECK(mass <= std::pow(leader_p, 1.0 - beta) * (1.0 + 1e-9));
        CHECK(mass >= std::pow(leader_p, 1.0 - beta) - leader_p - 1e-12);
        total += mass;
    }
    CHECK(total <= 1.0 + 1e-9);
}

TEST_CASE("model config parsing") {
    {
        std::istringstream cfg("# a biased coin\ntype coin\np 0.8\n");
        auto m = model_from_config(cfg);
        CHECK(m->prob(BitSequence::from_string("1")) == doctest::Approx(0.8));
    }
    {
        std::istringstream cfg("type interval\nlo 0.9\nhi 0.91\npolicy worst\n");
        auto m = model_from_config(cfg);
        CHECK(m->p_one(m->start()) >= 0.9);
    }
    {
        std::istringstream cfg("type markov\ninit 0.5 0.5\nrow0 0.9 0.1\nrow1 0.2 0.8\n");
        auto m = model_from_config(cfg);
        ModelCursor c = m->start();
        m->log2_step(c, 1);
        CHECK(m->p_one(c) == doctest::Approx(0.8));
    }
    {
        std::istringstream cfg("type product\nprobs 0.9 0.8 0.7\n");
        auto m = model_from_config(cfg);
        CHECK(m->prob(BitSequence::from_string("1111")) == doctest::Approx(0.9 * 0.8 * 0.7 * 0.9));
    }
    {
        std::istringstream cfg("type explicit\nword 00 0.25\nword 01 0.25\nword 1 0.5\n");
        auto m = model_from_config(cfg);
        CHECK(m->prob(BitSequence::from_string("0")) == doctest::Approx(0.5));
        CHECK(m->prob(BitSequence::from_string("01")) == doctest::Approx(0.25));
    }
    {
        std::istringstream cfg("type grouping\nbeta 0.2\nbase.type coin\nbase.p 0.8\n");
        ParsedModelConfig parsed = parse_model_config(cfg);
        CHECK(parsed.is_grouping);
        CHECK(parsed.grouping_beta == doctest::Approx(0.2));
        REQUIRE(parsed.grouping_base != nullptr);
        CHECK(parsed.grouping_base->prob(BitSequence::from_string("1")) == doctest::Approx(0.8));
    }
    {
        std::istringstream cfg("type coin\np 1.5\n");
        CHECK_THROWS_AS(model_from_config(cfg), ConfigError);
    }
    {
        std::istringstream cfg("type warp\n");
        CHECK_THROWS_AS(model_from_config(cfg), ConfigError);
    }
}
