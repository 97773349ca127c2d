#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vlx/bits.hpp"

namespace vlx {

/// Deterministic randomness handle. mt19937_64 plus hand-rolled draws so
/// sampled fixtures are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t word() { return eng_(); }

    // uniform in [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n) by rejection
    std::uint64_t below(std::uint64_t n);

    BitSequence bits(std::size_t count);

private:
    std::mt19937_64 eng_;
};

/// Walk state for a model: absolute position plus model-specific bits.
struct ModelCursor {
    std::uint64_t pos = 0;
    int state = -1;             // Markov: last emitted bit (-1 = at start)
    const void* node = nullptr; // explicit models: trie node
};

/// A stochastic bit process answering "probability of the next bit given the
/// prefix so far". Immutable after construction; safe to share.
class SourceModel {
public:
    virtual ~SourceModel() = default;

    virtual ModelCursor start() const { return {}; }

    // P[next = 1 | state].
    virtual double p_one(const ModelCursor& c) const = 0;

    // log2 P[next = bit | state]; advances the cursor.
    virtual double log2_step(ModelCursor& c, int bit) const = 0;

    virtual std::string describe() const = 0;

    // Per-position probabilities P[x_pos = 1], if the process is an
    // independent product (coins, cycled products, interval policies).
    virtual bool product_probabilities(std::uint64_t from, std::size_t count, std::vector<double>& out) const;

    // Finite-state transition table for shortest-surprisal searches:
    // out[s][bit] = (next state, log2 prob). Returns false when the model
    // has no small state space.
    virtual bool dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const;

    double log2_prob(const BitSequence& x) const;
    double prob(const BitSequence& x) const;
    double log2_prob_from(ModelCursor c, const BitSequence& x) const;

    BitSequence sample(Rng& rng, std::size_t count) const;
};

class CoinModel : public SourceModel {
public:
    explicit CoinModel(double p);
    double p_one(const ModelCursor&) const override { return p_; }
    double log2_step(ModelCursor& c, int bit) const override {
        ++c.pos;
        return bit ? l1_ : l0_;
    }
    std::string describe() const override;
    bool product_probabilities(std::uint64_t, std::size_t count, std::vector<double>& out) const override;
    bool dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const override;
    double p() const { return p_; }

private:
    double p_, l1_, l0_;
};

/// Independent process with per-position probabilities cycling through a list.
class ProductModel : public SourceModel {
public:
    explicit ProductModel(std::vector<double> probs);
    double p_one(const ModelCursor& c) const override { return probs_[c.pos % probs_.size()]; }
    double log2_step(ModelCursor& c, int bit) const override;
    std::string describe() const override;
    bool product_probabilities(std::uint64_t from, std::size_t count, std::vector<double>& out) const override;
    bool dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const override;

private:
    std::vector<double> probs_, l1_, l0_;
};

/// Two-state binary Markov chain.
class MarkovModel : public SourceModel {
public:
    // init = P[x1 = 0], P[x1 = 1]; row b = P[next = 0 | b], P[next = 1 | b]
    MarkovModel(std::array<double, 2> init, std::array<double, 2> row0, std::array<double, 2> row1);
    double p_one(const ModelCursor& c) const override;
    double log2_step(ModelCursor& c, int bit) const override;
    std::string describe() const override;
    bool dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const override;

private:
    std::array<double, 2> init_, row0_, row1_;
    std::array<double, 2> linit_, lrow0_, lrow1_; // cached log2 of the above
};

enum class IntervalPolicy { ConstantLo, ConstantHi, Alternating, Worst };

IntervalPolicy interval_policy_from_string(const std::string& s);
std::string to_string(IntervalPolicy p);

/// A coin whose per-flip probability is only known to lie in [lo, hi]; the
/// policy picks a concrete member of that uncertainty class.
class IntervalCoinModel : public SourceModel {
public:
    IntervalCoinModel(double lo, double hi, IntervalPolicy policy);
    double p_one(const ModelCursor& c) const override { return p_at(c.pos); }
    double log2_step(ModelCursor& c, int bit) const override;
    std::string describe() const override;
    bool product_probabilities(std::uint64_t from, std::size_t count, std::vector<double>& out) const override;
    bool dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const override;

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    IntervalPolicy policy() const { return policy_; }

private:
    double p_at(std::uint64_t pos) const { return steps_[pos % steps_.size()].p; }
    double lo_, hi_;
    IntervalPolicy policy_;
    struct Step {
        double p, l1, l0;
    };
    std::vector<Step> steps_; // cycled per-position probabilities
};

/// Distribution over a finite prefix-free set of words, emitting the chosen
/// word and then a deterministic run of zeros. Supports zero-mass gaps, which
/// adversarial syntheses need.
class ExplicitModel : public SourceModel {
public:
    explicit ExplicitModel(std::vector<std::pair<BitSequence, double>> table);
    ModelCursor start() const override;
    double p_one(const ModelCursor& c) const override;
    double log2_step(ModelCursor& c, int bit) const override;
    std::string describe() const override;

    const std::vector<std::pair<BitSequence, double>>& table() const { return table_; }

private:
    struct Node {
        double mass = 0.0;
        std::int64_t child[2] = {-1, -1};
        bool word_end = false;
    };
    std::vector<Node> nodes_;
    std::vector<std::pair<BitSequence, double>> table_;
};

/// View of a model starting at a later stream position. Only meaningful for
/// product-type processes, where conditioning on a consumed prefix is just a
/// position shift.
class ShiftedModel : public SourceModel {
public:
    ShiftedModel(const SourceModel& base, std::uint64_t offset) : base_(&base), offset_(offset) {}
    double p_one(const ModelCursor& c) const override;
    double log2_step(ModelCursor& c, int bit) const override;
    std::string describe() const override;
    bool product_probabilities(std::uint64_t from, std::size_t count, std::vector<double>& out) const override;
    bool dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const override;

private:
    const SourceModel* base_;
    std::uint64_t offset_;
};

struct DivergenceReport {
    double d_p = 0.0;
    BitSequence argmax;
    std::size_t set_size = 0;
};

// max over S_p of log2(P_R(x)/P_M(x)) / log2(1/P_M(x)). Throws DomainError
// when P_M(x) = 0 with P_R(x) > 0, or when P_M(x) = 1.
DivergenceReport divergence_dp(const SourceModel& R, const SourceModel& M, const std::vector<BitSequence>& sp);

// Per-symbol worst-case divergence of the interval class [lo, hi] against a
// coin with probability q; for independent products this equals the full
// sequence-level divergence.
double interval_coin_divergence(double lo, double hi, double q);

struct OptimalCoin {
    double q = 0.0;
    double beta = 0.0;
};

// The coin model minimizing interval_coin_divergence over q, and the
// minimized uncertainty.
OptimalCoin optimal_coin_model(double lo, double hi);

struct EfficiencyInterval {
    double lo = 0.0;
    double hi = 0.0;
};

// Efficiency range of a fixed-input-length extractor on the interval class:
// min-entropy rate divided by the per-symbol entropy range.
EfficiencyInterval fixed_length_baseline(double lo, double hi);

struct GroupingSource {
    std::unique_ptr<ExplicitModel> model;
    std::vector<std::vector<std::size_t>> groups; // indices into the sorted order
    std::vector<BitSequence> sorted;              // descending base probability
};

// Adversarial synthesis: orders sp by descending base probability, merges
// consecutive runs whose total mass approaches P(leader)^(1-beta), and puts
// each run's mass on its leader. The result keeps d_p against the base model
// close to beta while collapsing entropy toward (1-beta) of the base.
GroupingSource grouping_source(const SourceModel& base, const std::vector<BitSequence>& sp, double beta);

/// Parsed model config. Grouping configs carry the base model and beta; the
/// explicit table is synthesized later, once a stopping set is known.
struct ParsedModelConfig {
    std::unique_ptr<SourceModel> model; // null for grouping configs
    bool is_grouping = false;
    double grouping_beta = 0.0;
    std::unique_ptr<SourceModel> grouping_base;
};

// Line-based key-value model config ('#' starts a comment line).
ParsedModelConfig parse_model_config(std::istream& in);
std::unique_ptr<SourceModel> model_from_config(std::istream& in); // rejects grouping
std::unique_ptr<SourceModel> model_from_config_file(const std::string& path);

} // namespace vlx
