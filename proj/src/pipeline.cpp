#include "vlx/pipeline.hpp"

#include "vlx/errors.hpp"

namespace vlx {

SeededVlx make_seeded_vlx(Frontend f, const SourceModel* model, const ThresholdPlan& plan,
                          const StopLimits& limits, BitSequence seed) {
    SeededVlx vlx;
    vlx.frontend = f;
    vlx.model = model;
    vlx.plan = plan;
    vlx.limits = limits;

    if (plan.threshold < static_cast<double>(plan.k) - 1e-12)
        throw BudgetExceeded("threshold below k: T=" + std::to_string(plan.threshold) +
                             " < k=" + std::to_string(plan.k));

    std::size_t n = 0;
    switch (f) {
    case Frontend::Known:
        if (model == nullptr) throw ConfigError("the known-process construction needs a model");
        n = known_block_length(*model, plan.threshold, limits);
        break;
    case Frontend::Coin: n = coin_layout(plan.threshold).n; break;
    case Frontend::Lz: n = lz_layout(plan.threshold, plan.eps_lz).n; break;
    }

    vlx.spec = ExtractorSpec{n, static_cast<std::size_t>(plan.m), plan.k, plan.eps};
    vlx.spec.validate();
    if (!seed.empty()) set_seed(vlx, std::move(seed));
    return vlx;
}

void set_seed(SeededVlx& vlx, BitSequence seed) {
    if (seed.size() != vlx.spec.seed_length())
        throw ConfigError("seed length: expected " + std::to_string(vlx.spec.seed_length()) + " bits, got " +
                          std::to_string(seed.size()));
    vlx.seed = std::move(seed);
}

ExtractResult extract_seeded(const SeededVlx& vlx, BitReader& in) {
    if (vlx.seed.size() != vlx.spec.seed_length()) throw ConfigError("no seed set");
    ExtractResult result;
    switch (vlx.frontend) {
    case Frontend::Known: result.stop = stop_known(*vlx.model, vlx.plan, in, vlx.limits); break;
    case Frontend::Coin: result.stop = stop_coin(vlx.plan, in, vlx.limits); break;
    case Frontend::Lz: result.stop = stop_lz(vlx.plan, in, vlx.limits); break;
    }
    if (result.stop.block.z.size() != vlx.spec.n)
        throw Error("block length mismatch: got " + std::to_string(result.stop.block.z.size()) + ", expected " +
                    std::to_string(vlx.spec.n));
    result.output = toeplitz_extract(result.stop.block.z, vlx.seed, vlx.spec.m);
    result.consumed = result.stop.consumed;
    return result;
}

int inner_product_bit(const BitSequence& x, const BitSequence& y) {
    if (x.size() != y.size()) throw ConfigError("inner product needs equal-length blocks");
    int acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) acc ^= x[i] & y[i];
    return acc;
}

SeedlessResult extract_seedless(const BlockPlan& plan, const SeededVlx& vlx_template, BitReader& in) {
    if (plan.a < 2) throw ConfigError("block plan needs a >= 2");
    SeedlessResult result;
    result.effective = plan;

    std::size_t d = plan.d ? plan.d : vlx_template.spec.seed_length();
    if (d != vlx_template.spec.seed_length())
        throw ConfigError("block plan d must match the hasher seed length");
    if (result.effective.gamma < 2 * d) result.effective.gamma = 2 * d; // one pair per seed bit
    result.effective.d = d;

    std::size_t block_len = plan.a - 1;
    std::vector<BitSequence> blocks;
    blocks.reserve(result.effective.gamma);
    for (std::size_t i = 0; i < result.effective.gamma; ++i) {
        try {
            blocks.push_back(in.read_bits(block_len));
        } catch (const StreamExhausted&) {
            throw StreamExhausted("input ended inside conditioning block " + std::to_string(i));
        }
    }
    result.block_bits = static_cast<std::uint64_t>(result.effective.gamma) * block_len;

    BitSequence seed;
    for (std::size_t t = 0; t < d; ++t) seed.push_back(inner_product_bit(blocks[2 * t], blocks[2 * t + 1]));
    result.derived_seed = seed;

    SeededVlx vlx = vlx_template;
    set_seed(vlx, seed);
    result.tail = extract_seeded(vlx, in);
    result.output = result.tail.output;
    result.consumed = result.block_bits + result.tail.consumed;
    return result;
}

} // namespace vlx
