#include "vlx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vlx/errors.hpp"

namespace vlx {

namespace {

// Kahan-compensated accumulator.
struct KahanSum {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

std::uint64_t reverse_bits(std::uint64_t x, std::size_t width) {
    x = ((x & 0x5555555555555555ULL) << 1) | ((x >> 1) & 0x5555555555555555ULL);
    x = ((x & 0x3333333333333333ULL) << 2) | ((x >> 2) & 0x3333333333333333ULL);
    x = ((x & 0x0f0f0f0f0f0f0f0fULL) << 4) | ((x >> 4) & 0x0f0f0f0f0f0f0f0fULL);
    x = ((x & 0x00ff00ff00ff00ffULL) << 8) | ((x >> 8) & 0x00ff00ff00ff00ffULL);
    x = ((x & 0x0000ffff0000ffffULL) << 16) | ((x >> 16) & 0x0000ffff0000ffffULL);
    x = (x << 32) | (x >> 32);
    return x >> (64 - width);
}

// bit j of the result = x[j]
std::uint64_t pack_lsb(const BitSequence& x) {
    std::uint64_t v = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j]) v |= std::uint64_t{1} << j;
    return v;
}

std::vector<std::uint64_t> pack_lsb_words(const BitSequence& x) {
    std::vector<std::uint64_t> w((x.size() + 63) / 64, 0);
    for (std::size_t j = 0; j < x.size(); ++j)
        if (x[j]) w[j / 64] |= std::uint64_t{1} << (j % 64);
    return w;
}

int parity_u64(std::uint64_t v) { return __builtin_parityll(v); }

// parity of AND between z (n bits) and rs shifted right by `shift`
int parity_window(const std::vector<std::uint64_t>& rs, std::size_t shift, const std::vector<std::uint64_t>& z) {
    std::uint64_t acc = 0;
    std::size_t word = shift / 64, off = shift % 64;
    for (std::size_t i = 0; i < z.size(); ++i) {
        std::uint64_t window = 0;
        if (word + i < rs.size()) window = rs[word + i] >> off;
        if (off && word + i + 1 < rs.size()) window |= rs[word + i + 1] << (64 - off);
        acc ^= window & z[i];
    }
    return parity_u64(acc);
}

} // namespace

double Distribution::sum() const {
    KahanSum s;
    for (const auto& [_, p] : mass) s.add(p);
    return s.sum;
}

Distribution Distribution::uniform(std::size_t bits) {
    if (bits > 20) throw BudgetExceeded("uniform support 2^" + std::to_string(bits) + " is past the desk budget");
    Distribution d;
    double p = std::exp2(-static_cast<double>(bits));
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << bits); ++v)
        d.mass.emplace(BitSequence::from_u64(v, bits), p);
    return d;
}

double stat_distance(const Distribution& p, const Distribution& q) {
    double sp = p.sum(), sq = q.sum();
    if (std::abs(sp - sq) > 1e-6)
        throw DomainError("mass mismatch: " + std::to_string(sp) + " vs " + std::to_string(sq));
    KahanSum acc;
    auto it = p.mass.begin();
    auto jt = q.mass.begin();
    while (it != p.mass.end() || jt != q.mass.end()) {
        if (jt == q.mass.end() || (it != p.mass.end() && it->first < jt->first)) {
            acc.add(std::abs(it->second));
            ++it;
        } else if (it == p.mass.end() || jt->first < it->first) {
            acc.add(std::abs(jt->second));
            ++jt;
        } else {
            acc.add(std::abs(it->second - jt->second));
            ++it;
            ++jt;
        }
    }
    return 0.5 * acc.sum;
}

double minentropy(const Distribution& p) {
    if (p.mass.empty()) throw DomainError("min-entropy of an empty distribution");
    double best = 0.0;
    for (const auto& [_, v] : p.mass) best = std::max(best, v);
    if (best <= 0.0) throw DomainError("min-entropy of an all-zero distribution");
    return -std::log2(best);
}

double entropy(const Distribution& p) {
    KahanSum acc;
    for (const auto& [_, v] : p.mass)
        if (v > 0.0) acc.add(-v * std::log2(v));
    return acc.sum;
}

std::vector<WeightedWord> weighted_stop_set(const SeededVlx& vlx, const SourceModel& R, const OracleBudget& budget,
                                            std::uint64_t offset) {
    StopLimits limits = vlx.limits;
    limits.set_budget = std::min(limits.set_budget, budget.max_support);
    std::vector<BitSequence> sp = enumerate_stop_set(vlx.frontend, vlx.model, vlx.plan, limits);

    const SourceModel* weigher = &R;
    ShiftedModel shifted(R, offset);
    if (offset > 0) weigher = &shifted;

    std::vector<WeightedWord> out;
    out.reserve(sp.size());
    KahanSum total;
    for (auto& x : sp) {
        WeightedWord w;
        w.log2p = weigher->log2_prob(x);
        w.p = std::isinf(w.log2p) ? 0.0 : std::exp2(w.log2p);
        w.x = std::move(x);
        total.add(w.p);
        out.push_back(std::move(w));
    }
    if (std::abs(total.sum - 1.0) > 1e-6)
        throw DomainError("stopping-set mass under the source is " + std::to_string(total.sum) + ", not 1");
    return out;
}

namespace {

BitSequence encode_for(const SeededVlx& vlx, const BitSequence& raw) {
    switch (vlx.frontend) {
    case Frontend::Known: return encode_known(raw, vlx.spec.n);
    case Frontend::Coin: return encode_coin(raw, coin_layout(vlx.plan.threshold));
    case Frontend::Lz: return encode_lz(raw, lz_layout(vlx.plan.threshold, vlx.plan.eps_lz));
    }
    throw ConfigError("unknown frontend");
}

struct ZItem {
    BitSequence z;
    double p = 0.0;
};

std::vector<ZItem> merged_z_items(const SeededVlx& vlx, const std::vector<WeightedWord>& words) {
    std::map<BitSequence, double> merged;
    for (const auto& w : words) merged[encode_for(vlx, w.x)] += w.p;
    std::vector<ZItem> items;
    items.reserve(merged.size());
    for (auto& [z, p] : merged) items.push_back(ZItem{z, p});
    return items;
}

} // namespace

Distribution z_distribution(const SeededVlx& vlx, const SourceModel& R, const OracleBudget& budget) {
    Distribution d;
    for (const auto& item : merged_z_items(vlx, weighted_stop_set(vlx, R, budget))) d.mass[item.z] = item.p;
    return d;
}

PipelineReport verify_pipeline(const SeededVlx& vlx, const SourceModel& R, const OracleBudget& budget) {
    PipelineReport rep;
    rep.m = vlx.plan.m;
    rep.k = vlx.plan.k;
    rep.eps = vlx.plan.eps;
    rep.n = vlx.spec.n;
    rep.seed_length = vlx.spec.seed_length();

    std::vector<WeightedWord> words = weighted_stop_set(vlx, R, budget);
    rep.support_size = words.size();

    KahanSum hx, len;
    for (const auto& w : words) {
        if (w.p > 0.0) hx.add(-w.p * w.log2p);
        len.add(w.p * static_cast<double>(w.x.size()));
    }
    rep.entropy_X = hx.sum;
    rep.expected_input_length = len.sum;
    rep.efficiency = rep.entropy_X > 0.0 ? rep.m / rep.entropy_X : std::numeric_limits<double>::infinity();
    rep.efficiency_with_seed = rep.m / (rep.entropy_X + static_cast<double>(rep.seed_length));

    std::vector<ZItem> items = merged_z_items(vlx, words);
    {
        double zmax = 0.0;
        KahanSum hz;
        for (const auto& it : items) {
            zmax = std::max(zmax, it.p);
            if (it.p > 0.0) hz.add(-it.p * std::log2(it.p));
        }
        rep.minentropy_Z = -std::log2(zmax);
        rep.entropy_Z = hz.sum;
    }

    const std::size_t m = vlx.spec.m;
    const std::size_t n = vlx.spec.n;
    const std::size_t L = rep.seed_length;
    if (m > 20) throw BudgetExceeded("output space 2^" + std::to_string(m) + " is past the desk budget");
    const std::size_t bins_size = std::size_t{1} << m;

    std::vector<double> bins(bins_size);
    std::vector<double> marginal(bins_size, 0.0);
    KahanSum mean_tv;
    const double u = std::exp2(-static_cast<double>(m));

    rep.seed_sampled = !(L <= budget.exact_seed_bits && L <= 63);
    rep.seed_count = rep.seed_sampled ? budget.seed_samples : (std::size_t{1} << L);
    const double seed_w = 1.0 / static_cast<double>(rep.seed_count);

    auto run_seed_u64 = [&](std::uint64_t seed_bits, const std::vector<std::pair<std::uint64_t, double>>& zpacked) {
        std::fill(bins.begin(), bins.end(), 0.0);
        std::uint64_t rs = reverse_bits(seed_bits, L);
        for (const auto& [zv, p] : zpacked) {
            std::size_t y = 0;
            for (std::size_t i = 0; i < m; ++i)
                y |= static_cast<std::size_t>(parity_u64((rs >> (m - 1 - i)) & zv)) << i;
            bins[y] += p;
        }
        double tv = 0.0;
        for (std::size_t y = 0; y < bins_size; ++y) {
            tv += std::abs(bins[y] - u);
            marginal[y] += seed_w * bins[y];
        }
        mean_tv.add(seed_w * 0.5 * tv);
    };

    auto run_seed_words = [&](const BitSequence& seed, const std::vector<std::pair<std::vector<std::uint64_t>, double>>& zwords) {
        std::fill(bins.begin(), bins.end(), 0.0);
        BitSequence rs_bits;
        for (std::size_t s = 0; s < L; ++s) rs_bits.push_back(seed[L - 1 - s]);
        std::vector<std::uint64_t> rs = pack_lsb_words(rs_bits);
        for (const auto& [zw, p] : zwords) {
            std::size_t y = 0;
            for (std::size_t i = 0; i < m; ++i)
                y |= static_cast<std::size_t>(parity_window(rs, m - 1 - i, zw)) << i;
            bins[y] += p;
        }
        double tv = 0.0;
        for (std::size_t y = 0; y < bins_size; ++y) {
            tv += std::abs(bins[y] - u);
            marginal[y] += seed_w * bins[y];
        }
        mean_tv.add(seed_w * 0.5 * tv);
    };

    if (!rep.seed_sampled) {
        // exact: n <= L <= 63 here, so the word fast path always applies
        std::vector<std::pair<std::uint64_t, double>> zpacked;
        zpacked.reserve(items.size());
        for (const auto& it : items) zpacked.emplace_back(pack_lsb(it.z), it.p);
        for (std::uint64_t seed = 0; seed < (std::uint64_t{1} << L); ++seed) run_seed_u64(seed, zpacked);
    } else if (n <= 64 && L <= 63) {
        std::vector<std::pair<std::uint64_t, double>> zpacked;
        zpacked.reserve(items.size());
        for (const auto& it : items) zpacked.emplace_back(pack_lsb(it.z), it.p);
        Rng rng(budget.sampling_seed);
        for (std::size_t s = 0; s < rep.seed_count; ++s)
            run_seed_u64(rng.word() & ((std::uint64_t{1} << L) - 1), zpacked);
    } else {
        std::vector<std::pair<std::vector<std::uint64_t>, double>> zwords;
        zwords.reserve(items.size());
        for (const auto& it : items) zwords.emplace_back(pack_lsb_words(it.z), it.p);
        Rng rng(budget.sampling_seed);
        for (std::size_t s = 0; s < rep.seed_count; ++s) run_seed_words(rng.bits(L), zwords);
    }

    rep.distance_to_uniform = mean_tv.sum;
    {
        KahanSum tv, h;
        for (std::size_t y = 0; y < bins_size; ++y) {
            tv.add(std::abs(marginal[y] - u));
            if (marginal[y] > 0.0) h.add(-marginal[y] * std::log2(marginal[y]));
        }
        rep.distance_marginal = 0.5 * tv.sum;
        rep.entropy_output = h.sum;
    }
    return rep;
}

std::vector<TrendRow> efficiency_trend(Frontend f, const SourceModel* M, const SourceModel& R,
                                       const std::vector<int>& ms, const TrendOptions& options,
                                       const OracleBudget& budget) {
    std::vector<TrendRow> rows;
    for (int m : ms) {
        ThresholdPlan plan = options.k_equals_m
                                 ? ThresholdPlan::from_k(m, m, 1.0, options.beta, options.eps_p, std::nullopt,
                                                         options.eps_lz)
                                 : ThresholdPlan::from_params(m, options.eps, options.beta, options.eps_p,
                                                              std::nullopt, options.eps_lz);
        SeededVlx vlx = make_seeded_vlx(f, M, plan);
        std::vector<WeightedWord> words = weighted_stop_set(vlx, R, budget);
        TrendRow row;
        row.m = m;
        row.k = plan.k;
        row.threshold = plan.threshold;
        row.n = vlx.spec.n;
        row.seed_length = vlx.spec.seed_length();
        KahanSum hx, len;
        for (const auto& w : words) {
            if (w.p > 0.0) hx.add(-w.p * w.log2p);
            len.add(w.p * static_cast<double>(w.x.size()));
        }
        row.entropy_X = hx.sum;
        row.consumed_mean = len.sum;
        row.eta = m / row.entropy_X;
        row.eta_with_seed = m / (row.entropy_X + static_cast<double>(row.seed_length));
        rows.push_back(row);
    }
    return rows;
}

SeedlessReport verify_seedless(const BlockPlan& plan, const SeededVlx& tmpl, const SourceModel& R,
                               const OracleBudget& budget) {
    if (plan.a < 2) throw ConfigError("block plan needs a >= 2");
    SeedlessReport rep;
    rep.block_len = plan.a - 1;
    rep.d = tmpl.spec.seed_length();
    rep.gamma = std::max(plan.gamma, 2 * rep.d);

    const std::size_t b = rep.block_len;
    const std::size_t m = tmpl.spec.m;
    const std::size_t n = tmpl.spec.n;
    const std::size_t L = rep.d;
    // the character sum visits 4^m cells
    if (m > 13) throw BudgetExceeded("output space 2^" + std::to_string(m) + " is past the seedless desk budget");

    // Seed bit t is the inner product of blocks 2t and 2t+1; for a product
    // source the bits are independent with exactly computable bias.
    // character factor: E[(-1)^{seed_t}] = prod_j (1 - 2 p_j q_j)
    std::vector<double> factor(L);
    for (std::size_t t = 0; t < L; ++t) {
        std::vector<double> p1, p2;
        if (!R.product_probabilities(static_cast<std::uint64_t>(2 * t) * b, b, p1) ||
            !R.product_probabilities(static_cast<std::uint64_t>(2 * t + 1) * b, b, p2))
            throw BudgetExceeded("seedless oracle needs a source with per-position product probabilities");
        double f = 1.0;
        for (std::size_t j = 0; j < b; ++j) f *= 1.0 - 2.0 * p1[j] * p2[j];
        factor[t] = f;
        double bias = 0.5 * std::abs(f); // |P[bit=1] - 1/2|
        rep.max_seed_bias = std::max(rep.max_seed_bias, bias);
        rep.seed_distance_bound += bias;
    }
    rep.eps1_uniform = static_cast<double>(L) * std::exp2(-static_cast<double>(b) - 1.0);

    const std::uint64_t offset = static_cast<std::uint64_t>(rep.gamma) * b;
    std::vector<WeightedWord> words = weighted_stop_set(tmpl, R, budget, offset);
    rep.support_size = words.size();
    KahanSum hx, len;
    for (const auto& w : words) {
        if (w.p > 0.0) hx.add(-w.p * w.log2p);
        len.add(w.p * static_cast<double>(w.x.size()));
    }
    rep.entropy_X = hx.sum;
    rep.remainder_expected_length = len.sum;
    rep.expected_input_length = static_cast<double>(offset) + len.sum;

    std::vector<ZItem> items = merged_z_items(tmpl, words);

    // Exact output distribution through character sums: for u != 0,
    // F[u] = sum_z P(z) * prod over mask(u, z) of factor_t, where mask is the
    // GF(2) convolution of u with the reversed block. Linearity of the hash
    // in the seed makes this exact without touching the 2^d seed space.
    const std::size_t ysize = std::size_t{1} << m;
    std::vector<double> F(ysize, 0.0);
    F[0] = 1.0;
    const std::size_t mask_words = (L + 63) / 64;
    std::vector<std::uint64_t> mask(mask_words);
    for (const auto& item : items) {
        BitSequence rev;
        for (std::size_t s = 0; s < n; ++s) rev.push_back(item.z[n - 1 - s]);
        std::vector<std::uint64_t> revw = pack_lsb_words(rev);
        revw.resize(mask_words + 1, 0);
        for (std::size_t uu = 1; uu < ysize; ++uu) {
            std::fill(mask.begin(), mask.end(), 0);
            for (std::size_t i = 0; i < m; ++i) {
                if (!((uu >> i) & 1u)) continue;
                std::size_t off = i % 64; // i < m <= 20, so the word offset is 0
                for (std::size_t w2 = 0; w2 < mask_words; ++w2) {
                    std::uint64_t chunk = revw[w2] << off;
                    if (off && w2 > 0) chunk |= revw[w2 - 1] >> (64 - off);
                    mask[w2] ^= chunk;
                }
            }
            double chi = 1.0;
            for (std::size_t w2 = 0; w2 < mask_words && chi != 0.0; ++w2) {
                std::uint64_t bitsw = mask[w2];
                while (bitsw) {
                    std::size_t t = w2 * 64 + static_cast<std::size_t>(__builtin_ctzll(bitsw));
                    bitsw &= bitsw - 1;
                    if (t < L) chi *= factor[t];
                }
            }
            F[uu] += item.p * chi;
        }
    }

    KahanSum tv, hout;
    rep.output_marginal.assign(ysize, 0.0);
    const double base = 1.0 / static_cast<double>(ysize);
    for (std::size_t y = 0; y < ysize; ++y) {
        double dev = 0.0;
        for (std::size_t uu = 1; uu < ysize; ++uu) {
            int sign = parity_u64(static_cast<std::uint64_t>(uu & y)) ? -1 : 1;
            dev += sign * F[uu];
        }
        double py = base * (1.0 + dev);
        rep.output_marginal[y] = py;
        tv.add(std::abs(dev) * base);
        if (py > 0.0) hout.add(-py * std::log2(py));
    }
    rep.distance_to_uniform = 0.5 * tv.sum;
    rep.entropy_output = hout.sum;
    return rep;
}

} // namespace vlx
