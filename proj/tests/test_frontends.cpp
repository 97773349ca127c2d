#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "vlx/codec.hpp"
#include "vlx/errors.hpp"
#include "vlx/frontends.hpp"
#include "vlx/models.hpp"

using namespace vlx;

namespace {

GeneratorBitReader all_ones() {
    return GeneratorBitReader([] { return std::optional<int>(1); });
}

double set_mass(const SourceModel& m, const std::vector<BitSequence>& sp) {
    double total = 0.0;
    for (const auto& x : sp) total += m.prob(x);
    return total;
}

void check_prefix_free(const std::vector<BitSequence>& sp) {
    std::vector<BitSequence> sorted = sp;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        CHECK(!sorted[i].is_prefix_of(sorted[i + 1]));
        CHECK(sorted[i] != sorted[i + 1]);
    }
}

// replaying x must consume exactly x: the rule fires at the last bit and at
// no proper prefix
void check_minimal(Frontend f, const SourceModel* m, const ThresholdPlan& plan, const BitSequence& x) {
    SequenceBitReader in(x);
    StopOutcome out;
    switch (f) {
    case Frontend::Known: out = stop_known(*m, plan, in); break;
    case Frontend::Coin: out = stop_coin(plan, in); break;
    case Frontend::Lz: out = stop_lz(plan, in); break;
    }
    CHECK(out.raw == x);
    CHECK(out.consumed == x.size());
}

} // namespace

TEST_CASE("plan wiring and defaults") {
    ThresholdPlan plan = ThresholdPlan::from_params(2, 0.25, 0.0);
    CHECK(plan.k == 6);
    CHECK(plan.eps_p == 0.0); // exact model: no finite-size slack by default
    CHECK(plan.beta_p == 0.0);
    CHECK(plan.threshold == 6.0);

    ThresholdPlan uncertain = ThresholdPlan::from_params(2, 0.25, 0.0315);
    CHECK(uncertain.eps_p == 0.01);
    CHECK(uncertain.beta_p == doctest::Approx(0.0415));
    CHECK(uncertain.threshold == doctest::Approx(6.0 / (1.0 - 0.0415)));

    CHECK_THROWS_AS(ThresholdPlan::from_params(0, 0.25), ConfigError);
    CHECK_THROWS_AS(ThresholdPlan::from_params(2, -0.1), ConfigError);
    CHECK_THROWS_AS(ThresholdPlan::from_params(2, 0.25, 1.5), ConfigError);
    CHECK_THROWS_AS(ThresholdPlan::from_k(4, 2, 0.5), ConfigError); // k < m
}

TEST_CASE("known rule: coin 0.8 at threshold 2 gives the eight-sequence set") {
    CoinModel coin(0.8);
    auto sp = enumerate_stop_set(Frontend::Known, &coin, ThresholdPlan::fixture(2.0));
    std::set<std::string> got;
    for (const auto& x : sp) got.insert(x.to_string());
    std::set<std::string> want = {"0",     "10",     "110",     "1110",
                                  "11110", "111110", "1111110", "1111111"};
    CHECK(got == want);
    CHECK(known_block_length(coin, 2.0) == 7);
}

TEST_CASE("known rule: fair coin at integer threshold is a full level") {
    CoinModel fair(0.5);
    for (double t : {1.0, 4.0, 6.0}) {
        auto sp = enumerate_stop_set(Frontend::Known, &fair, ThresholdPlan::fixture(t));
        CHECK(sp.size() == (std::size_t{1} << static_cast<std::size_t>(t)));
        for (const auto& x : sp) CHECK(x.size() == static_cast<std::size_t>(t));
        CHECK(known_block_length(fair, t) == static_cast<std::size_t>(t));
    }
}

TEST_CASE("known rule walker: all-ones stream under coin 0.8 stops at 7") {
    CoinModel coin(0.8);
    auto in = all_ones();
    StopOutcome out = stop_known(coin, ThresholdPlan::fixture(2.0), in);
    CHECK(out.consumed == 7);
    CHECK(out.raw == BitSequence::from_string("1111111"));
    CHECK(out.block.n == 7);
    CHECK(out.block.z == out.raw); // already at the block length, no padding
}

TEST_CASE("known rule pads shorter stops with zeros") {
    CoinModel coin(0.8);
    SequenceBitReader in(BitSequence::from_string("10111111"));
    StopOutcome out = stop_known(coin, ThresholdPlan::fixture(2.0), in);
    CHECK(out.raw == BitSequence::from_string("10"));
    CHECK(out.consumed == 2);
    CHECK(out.block.z == BitSequence::from_string("1000000"));
}

TEST_CASE("known rule: block length via state DP matches enumeration for a Markov chain") {
    MarkovModel markov({0.3, 0.7}, {0.55, 0.45}, {0.05, 0.95});
    for (double t : {2.0, 3.0, 4.5}) {
        auto sp = enumerate_stop_set(Frontend::Known, &markov, ThresholdPlan::fixture(t));
        std::size_t longest = 0;
        for (const auto& x : sp) longest = std::max(longest, x.size());
        CHECK(known_block_length(markov, t) == longest);
    }
}

TEST_CASE("known rule: deterministic model fails with the cap in the message") {
    CoinModel sure(1.0);
    StopLimits limits;
    limits.length_cap = 64;
    auto in = all_ones();
    CHECK_THROWS_WITH_AS(stop_known(sure, ThresholdPlan::fixture(2.0), in, limits),
                         doctest::Contains("64"), BudgetExceeded);
}

TEST_CASE("known rule: stream exhaustion mid-sequence") {
    CoinModel coin(0.8);
    SequenceBitReader in(BitSequence::from_string("11"));
    CHECK_THROWS_AS(stop_known(coin, ThresholdPlan::fixture(2.0), in), StreamExhausted);
}

TEST_CASE("coin rule trace fixtures at threshold 3") {
    ThresholdPlan plan = ThresholdPlan::fixture(3.0);
    {
        SequenceBitReader in(BitSequence::from_string("11011100"));
        StopOutcome out = stop_coin(plan, in);
        CHECK(out.raw == BitSequence::from_string("1101110"));
        CHECK(out.consumed == 7);
    }
    {
        auto in = all_ones();
        StopOutcome out = stop_coin(plan, in);
        CHECK(out.consumed == 8); // C(8,1) = 8 reaches 2^3
        CHECK(out.raw.count_zeros() == 0);
    }
    {
        // a stream that ends exactly at the all-same stopping length is an
        // ordinary stop: nothing is read past the firing bit
        SequenceBitReader in(BitSequence::from_string("11111111"));
        StopOutcome out = stop_coin(plan, in);
        CHECK(out.consumed == 8);
        CHECK(!in.read().has_value());
    }
}

TEST_CASE("coin rule encoding splits indicator, count and rank") {
    ThresholdPlan plan = ThresholdPlan::fixture(3.0);
    CoinLayout layout = coin_layout(plan.threshold);
    CHECK(layout.count_width == 2); // values up to 3 fit
    CHECK(layout.rank_width == 6);
    CHECK(layout.n == 9);

    BitSequence x = BitSequence::from_string("1101110");
    BitSequence z = encode_coin(x, layout);
    REQUIRE(z.size() == 9);
    CHECK(z[0] == 0); // fewer zeros than ones
    CHECK(z.prefix(3).to_string() == "010"); // count field = 2
    // rank among the C(7,2)=21 same-multiset permutations
    BigUint r = rank(x);
    CHECK(r < binomial(7, 2));
    CHECK(z.to_string().substr(3) == r.to_bits(6).to_string());
}

TEST_CASE("coin rule: enumerated sets are complete, prefix-free and minimal") {
    ThresholdPlan plan = ThresholdPlan::fixture(4.0);
    auto sp = enumerate_stop_set(Frontend::Coin, nullptr, plan);
    check_prefix_free(sp);
    CoinModel fair(0.5), biased(0.85);
    CHECK(set_mass(fair, sp) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(set_mass(biased, sp) == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 0; i < sp.size(); i += 7) check_minimal(Frontend::Coin, nullptr, plan, sp[i]);
}

TEST_CASE("coin rule block length bound holds for every stop") {
    for (double t : {2.0, 3.5, 5.0, 8.0}) {
        ThresholdPlan plan = ThresholdPlan::fixture(t);
        CoinLayout layout = coin_layout(t);
        CHECK(layout.n <= 1 + static_cast<std::size_t>(std::ceil(std::log2(t + 1))) +
                              static_cast<std::size_t>(std::ceil(2 * t)));
        auto sp = enumerate_stop_set(Frontend::Coin, nullptr, plan);
        for (const auto& x : sp) {
            BitSequence z = encode_coin(x, layout);
            CHECK(z.size() == layout.n);
        }
    }
}

TEST_CASE("coin rule rank stays inside the rank field through threshold 8") {
    for (double t : {3.0, 5.0, 8.0}) {
        auto sp = enumerate_stop_set(Frontend::Coin, nullptr, ThresholdPlan::fixture(t));
        std::size_t width = static_cast<std::size_t>(std::ceil(2 * t));
        for (const auto& x : sp) CHECK(rank(x).bit_length() <= width);
    }
}

TEST_CASE("coin rule z collisions merge only across lengths, never within one") {
    // The (indicator, count, rank) triple does not carry the input length, so
    // stopping sequences of different lengths can share a block. Example at
    // threshold 3: 10011 and 011110 both land on (0, 2, rank 4).
    ThresholdPlan plan = ThresholdPlan::fixture(3.0);
    CoinLayout layout = coin_layout(plan.threshold);
    auto sp = enumerate_stop_set(Frontend::Coin, nullptr, plan);
    std::map<BitSequence, std::vector<BitSequence>> classes;
    for (const auto& x : sp) classes[encode_coin(x, layout)].push_back(x);

    BitSequence a = BitSequence::from_string("10011");
    BitSequence b = BitSequence::from_string("011110");
    CHECK(encode_coin(a, layout) == encode_coin(b, layout));

    for (const auto& [z, xs] : classes) {
        std::set<std::size_t> lengths;
        for (const auto& x : xs) {
            lengths.insert(x.size());
            CHECK(std::min(x.count_zeros(), x.count_ones()) ==
                  std::min(xs[0].count_zeros(), xs[0].count_ones()));
        }
        CHECK(lengths.size() == xs.size()); // same-length collisions never happen
    }
    // fair-coin weighting: merged masses cost less than one bit of min-entropy
    CoinModel fair(0.5);
    double max_raw = 0.0, max_z = 0.0;
    for (const auto& [z, xs] : classes) {
        double mass = 0.0;
        for (const auto& x : xs) {
            max_raw = std::max(max_raw, fair.prob(x));
            mass += fair.prob(x);
        }
        max_z = std::max(max_z, mass);
    }
    CHECK(-std::log2(max_z) >= -std::log2(max_raw) - 1.0);
}

TEST_CASE("lz rule reproduces the worked parses") {
    {
        // threshold 25 with no gap selects exactly 7 phrases, 3-bit indices
        LzLayout layout = lz_layout(25.0, 0.0);
        CHECK(layout.phrases == 7);
        CHECK(layout.index_width == 3);
        CHECK(layout.n == 28);
        SequenceBitReader in(BitSequence::from_string("010111001110000"));
        StopOutcome out = stop_lz(ThresholdPlan::fixture(25.0, 0.0), in);
        CHECK(out.consumed == 14);
        CHECK(out.block.z.to_string() == "0000" "0001" "0011" "0101" "0010" "1001" "1010");
    }
    {
        SequenceBitReader in(BitSequence::from_string("1011010100010"));
        auto codes = lz_parse(in, 4);
        CHECK(in.consumed() == 6);
        REQUIRE(codes.size() == 4);
        CHECK(codes[0] == PhraseTable::Code{0, 1});
        CHECK(codes[1] == PhraseTable::Code{0, 0});
        CHECK(codes[2] == PhraseTable::Code{1, 1});
        CHECK(codes[3] == PhraseTable::Code{2, 1});
        LzLayout layout{4, 3, 16};
        CHECK(encode_lz(BitSequence::from_string("101101"), layout).to_string() ==
              "0001" "0000" "0011" "0101");
    }
    {
        SequenceBitReader in(BitSequence::from_string("000000"));
        auto codes = lz_parse(in, 3);
        CHECK(in.consumed() == 6);
        CHECK(codes[0] == PhraseTable::Code{0, 0});
        CHECK(codes[1] == PhraseTable::Code{1, 0});
        CHECK(codes[2] == PhraseTable::Code{2, 0});
    }
}

TEST_CASE("lz rule: enumerated sets are complete, prefix-free and injective") {
    ThresholdPlan plan = ThresholdPlan::fixture(6.0); // 3 phrases
    LzLayout layout = lz_layout(plan.threshold, plan.eps_lz);
    auto sp = enumerate_stop_set(Frontend::Lz, nullptr, plan);
    check_prefix_free(sp);
    CoinModel fair(0.5), biased(0.9);
    CHECK(set_mass(fair, sp) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(set_mass(biased, sp) == doctest::Approx(1.0).epsilon(1e-9));
    std::set<std::string> zs;
    for (const auto& x : sp) {
        BitSequence z = encode_lz(x, layout);
        CHECK(z.size() == layout.n);
        CHECK(zs.insert(z.to_string()).second); // replayable codes are unique
    }
    for (std::size_t i = 0; i < sp.size(); i += 5) check_minimal(Frontend::Lz, nullptr, plan, sp[i]);
}

TEST_CASE("known rule: enumerated sets complete, prefix-free, minimal, injective") {
    CoinModel coin(0.8);
    MarkovModel markov({0.5, 0.5}, {0.9, 0.1}, {0.2, 0.8});
    ProductModel product({0.6, 0.75});
    struct Case {
        const SourceModel* m;
        double t;
    } cases[] = {{&coin, 2.0}, {&coin, 6.0}, {&markov, 5.0}, {&product, 6.0}};
    for (const auto& c : cases) {
        ThresholdPlan plan = ThresholdPlan::fixture(c.t);
        auto sp = enumerate_stop_set(Frontend::Known, c.m, plan);
        check_prefix_free(sp);
        CHECK(set_mass(*c.m, sp) == doctest::Approx(1.0).epsilon(1e-9));
        std::size_t n = known_block_length(*c.m, c.t);
        std::set<std::string> zs;
        for (const auto& x : sp) {
            CHECK(c.m->log2_prob(x) <= -c.t + 1e-9); // threshold soundness
            CHECK(x.size() <= n);
            CHECK(zs.insert(encode_known(x, n).to_string()).second); // padding is injective
        }
        for (std::size_t i = 0; i < sp.size(); i += 3) check_minimal(Frontend::Known, c.m, plan, sp[i]);
    }
}

TEST_CASE("threshold soundness transfers to diverging sources") {
    // any source within beta_p of the model keeps k bits of surprisal
    CoinModel m(0.8132);
    IntervalCoinModel r(0.8, 0.82, IntervalPolicy::ConstantLo);
    double t = 6.0;
    auto sp = enumerate_stop_set(Frontend::Known, &m, ThresholdPlan::fixture(t));
    double dp = divergence_dp(r, m, sp).d_p;
    REQUIRE(dp <= 0.0415);
    double k = t * (1.0 - 0.0415);
    for (const auto& x : sp) CHECK(r.log2_prob(x) <= -k + 1e-9);
}

TEST_CASE("coin rule soundness under the all-same-vector condition") {
    // with sources whose a-long constant runs are below 2^-k, the raw
    // stopping sequence keeps min-entropy k
    for (double t : {3.0, 5.0}) {
        ThresholdPlan plan = ThresholdPlan::fixture(t);
        auto sp = enumerate_stop_set(Frontend::Coin, nullptr, plan);
        double beta_p = 0.05;
        double k = t * (1.0 - beta_p);
        std::size_t a = std::size_t{1} << static_cast<std::size_t>(std::floor(t));
        CoinModel fair(0.5);
        IntervalCoinModel interval(0.55, 0.6, IntervalPolicy::Worst);
        for (const SourceModel* r :
             {static_cast<const SourceModel*>(&fair), static_cast<const SourceModel*>(&interval)}) {
            REQUIRE(r->log2_prob(BitSequence::from_string(std::string(a, '1'))) <= -k);
            REQUIRE(r->log2_prob(BitSequence::from_string(std::string(a, '0'))) <= -k);
            double max_lp = -1e300;
            for (const auto& x : sp) max_lp = std::max(max_lp, r->log2_prob(x));
            CHECK(-max_lp >= k - 1e-9);
        }
    }
}

TEST_CASE("enumeration budget refusals name the blowup") {
    CoinModel fair(0.5);
    StopLimits limits;
    limits.set_budget = 100;
    CHECK_THROWS_WITH_AS(enumerate_stop_set(Frontend::Known, &fair, ThresholdPlan::fixture(10.0), limits),
                         doctest::Contains("100"), BudgetExceeded);
}
