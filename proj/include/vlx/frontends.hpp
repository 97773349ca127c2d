#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vlx/bits.hpp"
#include "vlx/models.hpp"

namespace vlx {

/// Wiring from the requested output (m, eps) to the stopping threshold:
/// k intermediate min-entropy bits, uncertainty beta plus finite-size slack
/// eps_p, and threshold = k / (1 - beta_p) bits of model surprisal.
struct ThresholdPlan {
    int m = 1;
    double eps = 1.0;
    int k = 1;
    double alpha = 0.0;
    double beta = 0.0;
    double eps_p = 0.0;
    double beta_p = 0.0;
    double threshold = 1.0;
    double eps_lz = 0.1; // variable-output LZ gap parameter

    // Planner path: k from (m, eps), threshold = k / (1 - beta_p).
    // eps_p defaults to 0.01 for uncertain models (beta > 0) and 0 otherwise.
    static ThresholdPlan from_params(int m, double eps, double beta = 0.0,
                                     std::optional<double> eps_p = std::nullopt,
                                     std::optional<double> threshold_override = std::nullopt,
                                     double eps_lz = 0.1);

    // Direct path: caller fixes k; eps is recorded but not used for planning.
    static ThresholdPlan from_k(int m, int k, double eps, double beta = 0.0,
                                std::optional<double> eps_p = std::nullopt,
                                std::optional<double> threshold_override = std::nullopt,
                                double eps_lz = 0.1);

    // Threshold-only plan for stopping-rule fixtures.
    static ThresholdPlan fixture(double threshold, double eps_lz = 0.1);
};

struct StopLimits {
    std::size_t length_cap = 1u << 16;  // max bits per extraction
    std::size_t set_budget = 1u << 20;  // max enumerated stopping sequences
};

enum class Frontend { Known, Coin, Lz };

Frontend frontend_from_string(const std::string& s);
std::string to_string(Frontend f);

/// Fixed-length intermediate block with a min-entropy claim.
struct EncodedBlock {
    BitSequence z;
    std::size_t n = 0;
    int claimed_k = 0;
};

struct StopOutcome {
    BitSequence raw; // the consumed input sequence
    EncodedBlock block;
    std::uint64_t consumed = 0;
};

// ---- block geometry -------------------------------------------------------

// Least L such that every length-L sequence carries at least `threshold`
// bits of surprisal under M; equals the longest stopping sequence. Uses a
// shortest-surprisal DP over the model's state space, falling back to full
// enumeration for models without one.
std::size_t known_block_length(const SourceModel& M, double threshold, const StopLimits& limits = {});

struct CoinLayout {
    std::size_t count_width = 0; // bits for min(#zeros, #ones)
    std::size_t rank_width = 0;  // bits for the permutation rank
    std::size_t n = 0;           // 1 + count_width + rank_width
};
CoinLayout coin_layout(double threshold);

struct LzLayout {
    std::size_t phrases = 0;     // parse until this many phrases complete
    std::size_t index_width = 0; // bits per phrase-prefix location
    std::size_t n = 0;           // phrases * (index_width + 1)
};
LzLayout lz_layout(double threshold, double eps_lz);

// ---- stopping rules -------------------------------------------------------

// Reads until the model surprisal log2(1/P_M(x)) reaches plan.threshold;
// z is x zero-padded to the block length.
StopOutcome stop_known(const SourceModel& M, const ThresholdPlan& plan, BitReader& in,
                       const StopLimits& limits = {});

// Reads until log2 C(k0 + k1, max(1, min(k0, k1))) reaches plan.threshold;
// z = [ majority indicator | min(k0, k1) | permutation rank ].
StopOutcome stop_coin(const ThresholdPlan& plan, BitReader& in, const StopLimits& limits = {});

// Parses LZ phrases until the code length reaches threshold * (1 + eps_lz);
// z is the concatenated (prefix index, last bit) codes.
StopOutcome stop_lz(const ThresholdPlan& plan, BitReader& in, const StopLimits& limits = {});

// ---- encoders (raw stopping sequence -> block), shared with the oracle ----

BitSequence encode_known(const BitSequence& raw, std::size_t n);
BitSequence encode_coin(const BitSequence& raw, const CoinLayout& layout);
BitSequence encode_lz(const BitSequence& raw, const LzLayout& layout);

// Stopping predicate of the coin rule (exposed for tests).
bool coin_rule_stopped(std::uint64_t zeros, std::uint64_t ones, double threshold);

// ---- enumeration ----------------------------------------------------------

// All minimal stopping sequences, depth-first (0 branch before 1), so the
// result is deterministic. Throws BudgetExceeded when the set or the length
// cap overflows. M is required for Frontend::Known and ignored otherwise.
std::vector<BitSequence> enumerate_stop_set(Frontend f, const SourceModel* M, const ThresholdPlan& plan,
                                            const StopLimits& limits = {});

} // namespace vlx
