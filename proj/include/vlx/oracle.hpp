#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "vlx/models.hpp"
#include "vlx/pipeline.hpp"

namespace vlx {

/// Finite distribution over bit sequences.
struct Distribution {
    std::map<BitSequence, double> mass;

    double sum() const;
    static Distribution uniform(std::size_t bits); // 2^bits equiprobable words
};

// Half-L1 distance. Throws DomainError when the total masses disagree
// beyond tolerance.
double stat_distance(const Distribution& p, const Distribution& q);

double minentropy(const Distribution& p); // -log2 of the largest mass
double entropy(const Distribution& p);    // sum p*log2(1/p), 0 log 1/0 = 0

struct OracleBudget {
    std::size_t max_support = std::size_t{1} << 20; // stopping-set ceiling
    std::size_t exact_seed_bits = 20;               // exact averaging up to here
    std::size_t seed_samples = 10000;               // sampled averaging beyond
    std::uint64_t sampling_seed = 0x5eed5eed5eed5eedULL;
};

struct PipelineReport {
    // joint guarantee: mean over seeds of the per-seed output distance
    double distance_to_uniform = 0.0;
    // distance and entropy of the seed-averaged output itself
    double distance_marginal = 0.0;
    double entropy_output = 0.0;

    double minentropy_Z = 0.0;
    double entropy_Z = 0.0;
    double entropy_X = 0.0;
    double expected_input_length = 0.0;
    double efficiency = 0.0;           // m / H(X)
    double efficiency_with_seed = 0.0; // m / (H(X) + seed length)

    int m = 0;
    int k = 0;
    double eps = 0.0;
    std::size_t n = 0;
    std::size_t seed_length = 0;
    std::size_t support_size = 0;
    bool seed_sampled = false;
    std::size_t seed_count = 0;
};

struct WeightedWord {
    BitSequence x;
    double p = 0.0;
    double log2p = 0.0;
};

// The stopping set of the frontend together with its probabilities under R,
// optionally conditioned on R having already emitted `offset` symbols.
std::vector<WeightedWord> weighted_stop_set(const SeededVlx& vlx, const SourceModel& R,
                                            const OracleBudget& budget = {}, std::uint64_t offset = 0);

// Pushforward of the stopping-set distribution through the block encoder.
Distribution z_distribution(const SeededVlx& vlx, const SourceModel& R, const OracleBudget& budget = {});

// Exhaustive desk-scale verification: enumerates the stopping set under R,
// averages the hashed output over the seed space (exactly when the seed fits
// the budget, else over sampled seeds), and fills every report field.
PipelineReport verify_pipeline(const SeededVlx& vlx, const SourceModel& R, const OracleBudget& budget = {});

struct TrendOptions {
    double eps = 0.5;
    bool k_equals_m = false; // measure the alpha -> 0 regime instead of the planner's k
    double beta = 0.0;
    std::optional<double> eps_p;
    double eps_lz = 0.1;
};

struct TrendRow {
    int m = 0;
    int k = 0;
    double threshold = 0.0;
    std::size_t n = 0;
    std::size_t seed_length = 0;
    double consumed_mean = 0.0;
    double entropy_X = 0.0;
    double eta = 0.0;
    double eta_with_seed = 0.0;
};

std::vector<TrendRow> efficiency_trend(Frontend f, const SourceModel* M, const SourceModel& R,
                                       const std::vector<int>& ms, const TrendOptions& options = {},
                                       const OracleBudget& budget = {});

struct SeedlessReport {
    std::size_t d = 0;
    std::size_t gamma = 0;
    std::size_t block_len = 0;
    double distance_to_uniform = 0.0;  // exact distance of the composed output
    double eps1_uniform = 0.0;         // d * 2^-(block_len+1), the uniform-block figure
    double max_seed_bias = 0.0;        // max_t |P[seed_t=1] - 1/2|
    double seed_distance_bound = 0.0;  // sum of per-bit biases
    double entropy_X = 0.0;            // remainder input entropy
    double entropy_output = 0.0;
    double remainder_expected_length = 0.0;
    double expected_input_length = 0.0; // block bits + remainder mean
    std::size_t support_size = 0;
    std::vector<double> output_marginal; // indexed by y with bit i of y = y_i
};

// Exact analysis of the seedless cascade. The seed bits are independent
// inner products of disjoint block pairs, so the composed output
// distribution follows from per-character sums without enumerating the seed
// space. Requires a source with per-position product probabilities.
SeedlessReport verify_seedless(const BlockPlan& plan, const SeededVlx& vlx_template, const SourceModel& R,
                               const OracleBudget& budget = {});

} // namespace vlx
