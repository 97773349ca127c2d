#pragma once

#include <cstdint>

#include "vlx/bits.hpp"
#include "vlx/frontends.hpp"
#include "vlx/hasher.hpp"
#include "vlx/models.hpp"

namespace vlx {

/// A frontend cascaded with the universal-hash back end: variable input
/// length, fixed m-bit output. One instance owns one extraction at a time;
/// distinct instances run in parallel freely.
struct SeededVlx {
    Frontend frontend = Frontend::Known;
    const SourceModel* model = nullptr; // stopping model (Known only)
    ThresholdPlan plan;
    ExtractorSpec spec;
    BitSequence seed; // may be empty until set_seed
    StopLimits limits;
};

// Computes the block geometry, validates plan/spec coupling (threshold >= k,
// leftover-hash margin, seed length when given).
SeededVlx make_seeded_vlx(Frontend f, const SourceModel* model, const ThresholdPlan& plan,
                          const StopLimits& limits = {}, BitSequence seed = {});

void set_seed(SeededVlx& vlx, BitSequence seed);

struct ExtractResult {
    BitSequence output;
    std::uint64_t consumed = 0;
    StopOutcome stop;
};

ExtractResult extract_seeded(const SeededVlx& vlx, BitReader& in);

/// Block layout for the seedless cascade over block-wise conditionally
/// independent sources: gamma conditioning blocks of a-1 symbols feed the
/// internal two-source extractor, one inner-product bit per disjoint pair.
struct BlockPlan {
    std::size_t a = 11;     // symbols per conditioning block is a-1
    std::size_t gamma = 0;  // block count; 0 = derive from the seed need
    int k_d = 0;            // declared per-block min-entropy (config input)
    std::size_t d = 0;      // seed bits to produce; 0 = hasher's seed length
};

struct SeedlessResult {
    BitSequence output;
    std::uint64_t consumed = 0;   // block symbols + remainder symbols
    std::uint64_t block_bits = 0; // gamma * (a-1)
    BlockPlan effective;          // after any gamma adjustment
    BitSequence derived_seed;
    ExtractResult tail;
};

// Reads gamma blocks, derives the seed, then runs the seeded cascade on the
// remainder of the stream. gamma grows to 2*d when the plan supplies fewer
// pairs than the hasher needs.
SeedlessResult extract_seedless(const BlockPlan& plan, const SeededVlx& vlx_template, BitReader& in);

// GF(2) inner product of two equal-length blocks.
int inner_product_bit(const BitSequence& x, const BitSequence& y);

} // namespace vlx
