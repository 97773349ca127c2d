#include "vlx/frontends.hpp"

#include <cmath>
#include <limits>

#include "vlx/bigint.hpp"
#include "vlx/codec.hpp"
#include "vlx/errors.hpp"
#include "vlx/hasher.hpp"

namespace vlx {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ThresholdPlan ThresholdPlan::from_params(int m, double eps, double beta, std::optional<double> eps_p,
                                         std::optional<double> threshold_override, double eps_lz) {
    auto [k, alpha] = plan_params(m, eps);
    ThresholdPlan plan = from_k(m, k, eps, beta, eps_p, threshold_override, eps_lz);
    plan.alpha = alpha;
    return plan;
}

ThresholdPlan ThresholdPlan::from_k(int m, int k, double eps, double beta, std::optional<double> eps_p,
                                    std::optional<double> threshold_override, double eps_lz) {
    if (m < 1) throw ConfigError("m must be at least 1");
    if (k < m) throw ConfigError("k must be at least m");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("beta must lie in [0,1)");
    ThresholdPlan plan;
    plan.m = m;
    plan.k = k;
    plan.eps = eps;
    plan.alpha = static_cast<double>(k - m) / m;
    plan.beta = beta;
    plan.eps_p = eps_p.value_or(beta > 0.0 ? 0.01 : 0.0);
    if (plan.eps_p < 0.0) throw ConfigError("eps_p must be nonnegative");
    plan.beta_p = plan.beta + plan.eps_p;
    if (plan.beta_p >= 1.0) throw ConfigError("beta + eps_p must stay below 1");
    plan.threshold = threshold_override.value_or(k / (1.0 - plan.beta_p));
    if (eps_lz < 0.0) throw ConfigError("eps_lz must be nonnegative");
    plan.eps_lz = eps_lz;
    return plan;
}

ThresholdPlan ThresholdPlan::fixture(double threshold, double eps_lz) {
    ThresholdPlan plan;
    plan.threshold = threshold;
    plan.eps_lz = eps_lz;
    return plan;
}

Frontend frontend_from_string(const std::string& s) {
    if (s == "known") return Frontend::Known;
    if (s == "coin") return Frontend::Coin;
    if (s == "lz") return Frontend::Lz;
    throw ConfigError("unknown construction '" + s + "' (expected known|coin|lz)");
}

std::string to_string(Frontend f) {
    switch (f) {
    case Frontend::Known: return "known";
    case Frontend::Coin: return "coin";
    case Frontend::Lz: return "lz";
    }
    return "?";
}

// ---- geometry --------------------------------------------------------------

std::size_t known_block_length(const SourceModel& M, double threshold, const StopLimits& limits) {
    std::vector<std::array<std::pair<int, double>, 2>> trans;
    if (M.dp_transitions(trans)) {
        std::vector<double> cost(trans.size(), kInf);
        cost[0] = 0.0;
        std::vector<double> next(trans.size());
        for (std::size_t len = 1; len <= limits.length_cap; ++len) {
            std::fill(next.begin(), next.end(), kInf);
            for (std::size_t s = 0; s < trans.size(); ++s) {
                if (cost[s] == kInf) continue;
                for (int bit = 0; bit < 2; ++bit) {
                    auto [to, lp] = trans[s][bit];
                    double c = cost[s] - lp; // lp = -inf means an impossible edge
                    if (c < next[static_cast<std::size_t>(to)]) next[static_cast<std::size_t>(to)] = c;
                }
            }
            cost.swap(next);
            double best = kInf;
            for (double c : cost) best = std::min(best, c);
            if (best >= threshold) return len;
        }
        throw BudgetExceeded("surprisal threshold " + std::to_string(threshold) +
                             " not reached within length cap " + std::to_string(limits.length_cap));
    }
    // no compact state space: fall back to enumerating the stopping set
    auto sp = enumerate_stop_set(Frontend::Known, &M, ThresholdPlan::fixture(threshold), limits);
    std::size_t n = 0;
    for (const auto& x : sp) n = std::max(n, x.size());
    return n;
}

CoinLayout coin_layout(double threshold) {
    if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
    CoinLayout layout;
    layout.count_width = 1;
    while (std::exp2(static_cast<double>(layout.count_width)) < threshold + 1.0) ++layout.count_width;
    layout.rank_width = static_cast<std::size_t>(std::ceil(2.0 * threshold));
    layout.n = 1 + layout.count_width + layout.rank_width;
    return layout;
}

LzLayout lz_layout(double threshold, double eps_lz) {
    if (!(threshold > 0.0)) throw ConfigError("threshold must be positive");
    if (eps_lz < 0.0) throw ConfigError("eps_lz must be nonnegative");
    double target = threshold * (1.0 + eps_lz);
    LzLayout layout;
    layout.phrases = 1;
    while (true) {
        std::size_t w = 1;
        while (std::exp2(static_cast<double>(w)) < static_cast<double>(layout.phrases + 1)) ++w;
        if (static_cast<double>(layout.phrases * (w + 1)) >= target) {
            layout.index_width = w;
            layout.n = layout.phrases * (w + 1);
            return layout;
        }
        ++layout.phrases;
    }
}

// ---- stopping rules --------------------------------------------------------

bool coin_rule_stopped(std::uint64_t zeros, std::uint64_t ones, double threshold) {
    std::uint64_t total = zeros + ones;
    if (total == 0) return false;
    std::uint64_t low = std::max<std::uint64_t>(1, std::min(zeros, ones));
    const BigUint& c = binomial(static_cast<std::uint32_t>(total), static_cast<std::uint32_t>(low));
    return c.log2() >= threshold;
}

BitSequence encode_known(const BitSequence& raw, std::size_t n) {
    if (raw.size() > n) throw Error("stopping sequence longer than block length");
    BitSequence z = raw;
    z.append(BitSequence::zeros(n - raw.size()));
    return z;
}

BitSequence encode_coin(const BitSequence& raw, const CoinLayout& layout) {
    std::uint64_t ones = raw.count_ones();
    std::uint64_t zeros = raw.size() - ones;
    std::uint64_t low = std::min(zeros, ones);
    BitSequence z;
    z.push_back(zeros >= ones ? 1 : 0);
    if (BigUint(low).bit_length() > layout.count_width)
        throw Error("count field overflow: min(k0,k1)=" + std::to_string(low));
    z.append(BigUint(low).to_bits(layout.count_width));
    RankValue r{rank(raw), layout.rank_width};
    if (r.value.bit_length() > r.width)
        throw Error("rank field overflow: rank needs " + std::to_string(r.value.bit_length()) + " bits");
    z.append(r.value.to_bits(r.width));
    return z;
}

BitSequence encode_lz(const BitSequence& raw, const LzLayout& layout) {
    SequenceBitReader replay(raw);
    auto codes = lz_parse(replay, layout.phrases);
    if (replay.consumed() != raw.size()) throw Error("raw sequence is longer than its LZ parse");
    BitSequence z;
    for (const auto& code : codes) {
        z.append(BigUint(code.prefix_index).to_bits(layout.index_width));
        z.push_back(code.last_bit);
    }
    return z;
}

namespace {

int read_or_throw(BitReader& in) {
    auto b = in.read();
    if (!b) throw StreamExhausted("input ended before the stopping rule fired");
    return *b;
}

void check_cap(std::size_t len, const StopLimits& limits) {
    if (len > limits.length_cap)
        throw BudgetExceeded("stopping rule still running at length cap " + std::to_string(limits.length_cap));
}

} // namespace

StopOutcome stop_known(const SourceModel& M, const ThresholdPlan& plan, BitReader& in, const StopLimits& limits) {
    std::size_t n = known_block_length(M, plan.threshold, limits);
    StopOutcome out;
    ModelCursor cur = M.start();
    double surprisal = 0.0;
    while (surprisal < plan.threshold) {
        check_cap(out.raw.size() + 1, limits);
        int bit = read_or_throw(in);
        surprisal -= M.log2_step(cur, bit);
        out.raw.push_back(bit);
    }
    out.consumed = out.raw.size();
    out.block = EncodedBlock{encode_known(out.raw, n), n, plan.k};
    return out;
}

StopOutcome stop_coin(const ThresholdPlan& plan, BitReader& in, const StopLimits& limits) {
    CoinLayout layout = coin_layout(plan.threshold);
    StopOutcome out;
    std::uint64_t zeros = 0, ones = 0;
    while (!coin_rule_stopped(zeros, ones, plan.threshold)) {
        check_cap(out.raw.size() + 1, limits);
        int bit = read_or_throw(in);
        (bit ? ones : zeros) += 1;
        out.raw.push_back(bit);
    }
    out.consumed = out.raw.size();
    out.block = EncodedBlock{encode_coin(out.raw, layout), layout.n, plan.k};
    return out;
}

StopOutcome stop_lz(const ThresholdPlan& plan, BitReader& in, const StopLimits& limits) {
    LzLayout layout = lz_layout(plan.threshold, plan.eps_lz);
    StopOutcome out;
    PhraseTable table;
    PhraseTable::Walk walk;
    BitSequence z;
    std::size_t done = 0;
    while (done < layout.phrases) {
        check_cap(out.raw.size() + 1, limits);
        int bit = read_or_throw(in);
        out.raw.push_back(bit);
        if (auto code = table.step(walk, bit)) {
            z.append(BigUint(code->prefix_index).to_bits(layout.index_width));
            z.push_back(code->last_bit);
            ++done;
        }
    }
    out.consumed = out.raw.size();
    out.block = EncodedBlock{std::move(z), layout.n, plan.k};
    return out;
}

// ---- enumeration -----------------------------------------------------------

namespace {

template <class State, class Step, class Stopped>
std::vector<BitSequence> enumerate_dfs(State init, Step step, Stopped stopped, const StopLimits& limits) {
    struct Frame {
        State state;
        int next_bit = 0;
    };
    std::vector<BitSequence> result;
    std::vector<Frame> stack;
    stack.push_back(Frame{std::move(init), 0});
    BitSequence path;
    while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.next_bit > 1) {
            stack.pop_back();
            if (!path.empty()) path.pop_back();
            continue;
        }
        int bit = top.next_bit++;
        State child = top.state;
        step(child, bit);
        path.push_back(bit);
        if (stopped(child)) {
            result.push_back(path);
            if (result.size() > limits.set_budget)
                throw BudgetExceeded("stopping set exceeds budget " + std::to_string(limits.set_budget));
            path.pop_back();
            continue;
        }
        if (path.size() >= limits.length_cap)
            throw BudgetExceeded("stopping rule still open at length cap " + std::to_string(limits.length_cap));
        stack.push_back(Frame{std::move(child), 0});
    }
    return result;
}

} // namespace

std::vector<BitSequence> enumerate_stop_set(Frontend f, const SourceModel* M, const ThresholdPlan& plan,
                                            const StopLimits& limits) {
    switch (f) {
    case Frontend::Known: {
        if (M == nullptr) throw ConfigError("the known-process rule needs a model");
        struct State {
            ModelCursor cur;
            double surprisal;
        };
        State init{M->start(), 0.0};
        return enumerate_dfs(
            init, [&](State& s, int bit) { s.surprisal -= M->log2_step(s.cur, bit); },
            [&](const State& s) { return s.surprisal >= plan.threshold; }, limits);
    }
    case Frontend::Coin: {
        struct State {
            std::uint64_t zeros = 0, ones = 0;
        };
        return enumerate_dfs(
            State{}, [](State& s, int bit) { (bit ? s.ones : s.zeros) += 1; },
            [&](const State& s) { return coin_rule_stopped(s.zeros, s.ones, plan.threshold); }, limits);
    }
    case Frontend::Lz: {
        LzLayout layout = lz_layout(plan.threshold, plan.eps_lz);
        struct State {
            PhraseTable table;
            PhraseTable::Walk walk;
            std::size_t done = 0;
        };
        return enumerate_dfs(
            State{},
            [](State& s, int bit) {
                if (s.table.step(s.walk, bit)) s.done += 1;
            },
            [&](const State& s) { return s.done >= layout.phrases; }, limits);
    }
    }
    throw ConfigError("unknown frontend");
}

} // namespace vlx
