#include "vlx/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "vlx/errors.hpp"

namespace vlx {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_prob(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0,1]");
}

double safe_log2(double p) {
    return p > 0.0 ? std::log2(p) : kNegInf;
}

} // namespace

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw ConfigError("Rng::below(0)");
    std::uint64_t threshold = (0 - n) % n; // 2^64 mod n
    std::uint64_t v = eng_();
    while (v < threshold) v = eng_();
    return v % n;
}

BitSequence Rng::bits(std::size_t count) {
    BitSequence out;
    std::uint64_t word = 0;
    int avail = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (avail == 0) {
            word = eng_();
            avail = 64;
        }
        --avail;
        out.push_back(static_cast<int>((word >> avail) & 1u));
    }
    return out;
}

bool SourceModel::product_probabilities(std::uint64_t, std::size_t, std::vector<double>&) const {
    return false;
}

bool SourceModel::dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>&) const {
    return false;
}

double SourceModel::log2_prob(const BitSequence& x) const {
    return log2_prob_from(start(), x);
}

double SourceModel::log2_prob_from(ModelCursor c, const BitSequence& x) const {
    double lp = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) lp += log2_step(c, x[i]);
    return lp;
}

double SourceModel::prob(const BitSequence& x) const {
    double lp = log2_prob(x);
    return std::isinf(lp) ? 0.0 : std::exp2(lp);
}

BitSequence SourceModel::sample(Rng& rng, std::size_t count) const {
    BitSequence out;
    ModelCursor c = start();
    for (std::size_t i = 0; i < count; ++i) {
        int bit = rng.uniform() < p_one(c) ? 1 : 0;
        log2_step(c, bit);
        out.push_back(bit);
    }
    return out;
}

CoinModel::CoinModel(double p) : p_(p), l1_(safe_log2(p)), l0_(safe_log2(1.0 - p)) {
    check_prob(p, "coin p");
}

std::string CoinModel::describe() const {
    return "coin(p=" + std::to_string(p_) + ")";
}

bool CoinModel::product_probabilities(std::uint64_t, std::size_t count, std::vector<double>& out) const {
    out.assign(count, p_);
    return true;
}

bool CoinModel::dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const {
    out.assign(1, {std::pair<int, double>{0, l0_}, std::pair<int, double>{0, l1_}});
    return true;
}

ProductModel::ProductModel(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw ConfigError("product model needs at least one probability");
    for (double p : probs_) check_prob(p, "product p_i");
    l1_.reserve(probs_.size());
    l0_.reserve(probs_.size());
    for (double p : probs_) {
        l1_.push_back(safe_log2(p));
        l0_.push_back(safe_log2(1.0 - p));
    }
}

double ProductModel::log2_step(ModelCursor& c, int bit) const {
    std::size_t i = c.pos % probs_.size();
    ++c.pos;
    return bit ? l1_[i] : l0_[i];
}

std::string ProductModel::describe() const {
    std::string s = "product(";
    for (std::size_t i = 0; i < probs_.size(); ++i) s += (i ? "," : "") + std::to_string(probs_[i]);
    return s + ")";
}

bool ProductModel::product_probabilities(std::uint64_t from, std::size_t count, std::vector<double>& out) const {
    out.resize(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = probs_[(from + i) % probs_.size()];
    return true;
}

bool ProductModel::dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const {
    std::size_t n = probs_.size();
    out.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        int next = static_cast<int>((s + 1) % n);
        out[s] = {std::pair<int, double>{next, l0_[s]}, std::pair<int, double>{next, l1_[s]}};
    }
    return true;
}

MarkovModel::MarkovModel(std::array<double, 2> init, std::array<double, 2> row0, std::array<double, 2> row1)
    : init_(init), row0_(row0), row1_(row1) {
    for (auto& pair : {init, row0, row1}) {
        check_prob(pair[0], "markov entry");
        check_prob(pair[1], "markov entry");
        if (std::abs(pair[0] + pair[1] - 1.0) > 1e-9) throw ConfigError("markov row must sum to 1");
    }
    for (int b = 0; b < 2; ++b) {
        linit_[b] = safe_log2(init_[b]);
        lrow0_[b] = safe_log2(row0_[b]);
        lrow1_[b] = safe_log2(row1_[b]);
    }
}

double MarkovModel::p_one(const ModelCursor& c) const {
    if (c.state < 0) return init_[1];
    return c.state == 0 ? row0_[1] : row1_[1];
}

double MarkovModel::log2_step(ModelCursor& c, int bit) const {
    double lp;
    if (c.state < 0)
        lp = linit_[bit];
    else
        lp = c.state == 0 ? lrow0_[bit] : lrow1_[bit];
    c.state = bit;
    ++c.pos;
    return lp;
}

std::string MarkovModel::describe() const {
    return "markov(init1=" + std::to_string(init_[1]) + ",p01=" + std::to_string(row0_[1]) +
           ",p11=" + std::to_string(row1_[1]) + ")";
}

bool MarkovModel::dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const {
    // state 0 = at start, 1 = last bit was 0, 2 = last bit was 1
    out.resize(3);
    out[0] = {std::pair<int, double>{1, linit_[0]}, std::pair<int, double>{2, linit_[1]}};
    out[1] = {std::pair<int, double>{1, lrow0_[0]}, std::pair<int, double>{2, lrow0_[1]}};
    out[2] = {std::pair<int, double>{1, lrow1_[0]}, std::pair<int, double>{2, lrow1_[1]}};
    return true;
}

IntervalPolicy interval_policy_from_string(const std::string& s) {
    if (s == "lo" || s == "constant-lo") return IntervalPolicy::ConstantLo;
    if (s == "hi" || s == "constant-hi") return IntervalPolicy::ConstantHi;
    if (s == "alternating") return IntervalPolicy::Alternating;
    if (s == "worst") return IntervalPolicy::Worst;
    throw ConfigError("unknown interval policy '" + s + "'");
}

std::string to_string(IntervalPolicy p) {
    switch (p) {
    case IntervalPolicy::ConstantLo: return "constant-lo";
    case IntervalPolicy::ConstantHi: return "constant-hi";
    case IntervalPolicy::Alternating: return "alternating";
    case IntervalPolicy::Worst: return "worst";
    }
    return "?";
}

IntervalCoinModel::IntervalCoinModel(double lo, double hi, IntervalPolicy policy)
    : lo_(lo), hi_(hi), policy_(policy) {
    if (!(lo > 0.0 && lo <= hi && hi < 1.0)) throw ConfigError("interval requires 0 < lo <= hi < 1");
    auto step = [](double p) { return Step{p, std::log2(p), std::log2(1.0 - p)}; };
    switch (policy) {
    case IntervalPolicy::ConstantLo: steps_ = {step(lo)}; break;
    case IntervalPolicy::ConstantHi: steps_ = {step(hi)}; break;
    case IntervalPolicy::Alternating: steps_ = {step(lo), step(hi)}; break;
    case IntervalPolicy::Worst: {
        // pick the endpoint whose single-symbol divergence against the best
        // coin approximation is larger; for independent products that is the
        // divergence-maximizing member of the class
        OptimalCoin oc = optimal_coin_model(lo, hi);
        double f0 = std::log2((1.0 - lo) / (1.0 - oc.q)) / std::log2(1.0 / (1.0 - oc.q));
        double f1 = std::log2(hi / oc.q) / std::log2(1.0 / oc.q);
        steps_ = {step(f0 >= f1 ? lo : hi)};
        break;
    }
    }
}

double IntervalCoinModel::log2_step(ModelCursor& c, int bit) const {
    const Step& s = steps_[c.pos % steps_.size()];
    ++c.pos;
    return bit ? s.l1 : s.l0;
}

std::string IntervalCoinModel::describe() const {
    return "interval([" + std::to_string(lo_) + "," + std::to_string(hi_) + "]," + to_string(policy_) + ")";
}

bool IntervalCoinModel::product_probabilities(std::uint64_t from, std::size_t count, std::vector<double>& out) const {
    out.resize(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = p_at(from + i);
    return true;
}

bool IntervalCoinModel::dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>& out) const {
    std::size_t n = steps_.size();
    out.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        int next = static_cast<int>((s + 1) % n);
        out[s] = {std::pair<int, double>{next, steps_[s].l0}, std::pair<int, double>{next, steps_[s].l1}};
    }
    return true;
}

ExplicitModel::ExplicitModel(std::vector<std::pair<BitSequence, double>> table) : table_(std::move(table)) {
    nodes_.emplace_back();
    double total = 0.0;
    for (const auto& [word, mass] : table_) {
        if (mass < 0.0) throw ConfigError("explicit model mass must be nonnegative");
        total += mass;
        if (mass == 0.0) continue;
        std::size_t cur = 0;
        nodes_[0].mass += mass;
        for (std::size_t i = 0; i < word.size(); ++i) {
            if (nodes_[cur].word_end) throw ConfigError("explicit model words must be prefix-free");
            int bit = word[i];
            std::int64_t next = nodes_[cur].child[bit];
            if (next < 0) {
                next = static_cast<std::int64_t>(nodes_.size());
                nodes_[cur].child[bit] = next;
                nodes_.emplace_back();
            }
            cur = static_cast<std::size_t>(next);
            nodes_[cur].mass += mass;
        }
        if (nodes_[cur].child[0] >= 0 || nodes_[cur].child[1] >= 0)
            throw ConfigError("explicit model words must be prefix-free");
        nodes_[cur].word_end = true;
    }
    if (std::abs(total - 1.0) > 1e-6) throw ConfigError("explicit model masses must sum to 1");
}

ModelCursor ExplicitModel::start() const {
    ModelCursor c;
    c.node = &nodes_[0];
    return c;
}

double ExplicitModel::p_one(const ModelCursor& c) const {
    const Node* node = static_cast<const Node*>(c.node);
    if (node == nullptr || node->word_end) return 0.0; // zero continuation
    double child_mass = node->child[1] >= 0 ? nodes_[static_cast<std::size_t>(node->child[1])].mass : 0.0;
    return node->mass > 0.0 ? child_mass / node->mass : 0.0;
}

double ExplicitModel::log2_step(ModelCursor& c, int bit) const {
    const Node* node = static_cast<const Node*>(c.node);
    ++c.pos;
    if (node == nullptr || node->word_end) {
        // after a completed word the process emits zeros forever
        if (bit == 0) return 0.0;
        c.node = nullptr;
        return kNegInf;
    }
    std::int64_t next = node->child[bit];
    if (next < 0) {
        c.node = nullptr;
        return kNegInf;
    }
    const Node& child = nodes_[static_cast<std::size_t>(next)];
    c.node = &child;
    return safe_log2(child.mass / node->mass);
}

std::string ExplicitModel::describe() const {
    return "explicit(" + std::to_string(table_.size()) + " words)";
}

double ShiftedModel::p_one(const ModelCursor& c) const {
    ModelCursor t = c;
    t.pos += offset_;
    return base_->p_one(t);
}

double ShiftedModel::log2_step(ModelCursor& c, int bit) const {
    ModelCursor t = c;
    t.pos += offset_;
    double lp = base_->log2_step(t, bit);
    ++c.pos;
    c.state = t.state;
    return lp;
}

std::string ShiftedModel::describe() const {
    return base_->describe() + "+" + std::to_string(offset_);
}

bool ShiftedModel::product_probabilities(std::uint64_t from, std::size_t count, std::vector<double>& out) const {
    return base_->product_probabilities(from + offset_, count, out);
}

bool ShiftedModel::dp_transitions(std::vector<std::array<std::pair<int, double>, 2>>&) const {
    return false;
}

DivergenceReport divergence_dp(const SourceModel& R, const SourceModel& M, const std::vector<BitSequence>& sp) {
    if (sp.empty()) throw ConfigError("divergence over an empty set");
    DivergenceReport rep;
    rep.set_size = sp.size();
    rep.d_p = kNegInf;
    for (const auto& x : sp) {
        double lm = M.log2_prob(x);
        if (lm == 0.0) throw DomainError("divergence denominator zero: reference probability 1 for " + x.to_string());
        double lr = R.log2_prob(x);
        if (std::isinf(lm)) {
            if (!std::isinf(lr)) throw DomainError("divergence undefined: zero reference probability for " + x.to_string());
            throw DomainError("divergence undefined: both probabilities vanish for " + x.to_string());
        }
        double ratio = std::isinf(lr) ? kNegInf : (lr - lm) / (-lm);
        if (ratio > rep.d_p) {
            rep.d_p = ratio;
            rep.argmax = x;
        }
    }
    return rep;
}

double interval_coin_divergence(double lo, double hi, double q) {
    if (!(lo > 0.0 && lo <= hi && hi < 1.0)) throw ConfigError("invalid interval");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("invalid coin probability");
    double f0 = std::log2((1.0 - lo) / (1.0 - q)) / std::log2(1.0 / (1.0 - q));
    double f1 = std::log2(hi / q) / std::log2(1.0 / q);
    return std::max(f0, f1);
}

OptimalCoin optimal_coin_model(double lo, double hi) {
    if (!(lo > 0.0 && lo <= hi && hi < 1.0)) throw ConfigError("invalid interval");
    if (lo == hi) return {lo, 0.0};
    // On [lo, hi] the zero-side ratio rises from 0 while the one-side ratio
    // falls to 0; the max is minimized where they cross.
    double a = lo, b = hi;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (a + b);
        double f0 = std::log2((1.0 - lo) / (1.0 - mid)) / std::log2(1.0 / (1.0 - mid));
        double f1 = std::log2(hi / mid) / std::log2(1.0 / mid);
        if (f0 < f1)
            a = mid;
        else
            b = mid;
    }
    double q = 0.5 * (a + b);
    return {q, interval_coin_divergence(lo, hi, q)};
}

EfficiencyInterval fixed_length_baseline(double lo, double hi) {
    if (!(lo > 0.0 && lo <= hi && hi < 1.0)) throw ConfigError("invalid interval");
    auto h = [](double p) {
        return p * std::log2(1.0 / p) + (1.0 - p) * std::log2(1.0 / (1.0 - p));
    };
    double rate = -std::log2(std::max(hi, 1.0 - lo)); // worst-case min-entropy per symbol
    double h_lo = h(lo), h_hi = h(hi);
    double h_max = std::max(h_lo, h_hi);
    double h_min = std::min(h_lo, h_hi);
    if (lo <= 0.5 && 0.5 <= hi) h_max = 1.0;
    return {rate / h_max, rate / h_min};
}

GroupingSource grouping_source(const SourceModel& base, const std::vector<BitSequence>& sp, double beta) {
    if (sp.empty()) throw ConfigError("grouping over an empty set");
    if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("grouping beta must lie in [0,1)");

    GroupingSource out;
    std::vector<double> probs(sp.size());
    std::vector<std::size_t> order(sp.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < sp.size(); ++i) probs[i] = base.prob(sp[i]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (probs[a] != probs[b]) return probs[a] > probs[b];
        return sp[a] < sp[b]; // ties broken lexicographically
    });
    std::vector<BitSequence> sorted;
    sorted.reserve(sp.size());
    std::vector<double> p_sorted;
    p_sorted.reserve(sp.size());
    for (std::size_t idx : order) {
        sorted.push_back(sp[idx]);
        p_sorted.push_back(probs[idx]);
    }
    out.sorted = sorted;

    std::vector<std::pair<BitSequence, double>> table(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) table[i] = {sorted[i], 0.0};

    std::size_t i = 0;
    while (i < sorted.size()) {
        double leader_p = p_sorted[i];
        double target = std::pow(leader_p, 1.0 - beta);
        double total = leader_p;
        std::size_t j = i + 1;
        while (j < sorted.size() && total + p_sorted[j] <= target * (1.0 + 1e-12)) {
            total += p_sorted[j];
            ++j;
        }
        std::vector<std::size_t> group;
        for (std::size_t k = i; k < j; ++k) group.push_back(k);
        out.groups.push_back(std::move(group));
        table[i].second = total;
        i = j;
    }

    out.model = std::make_unique<ExplicitModel>(std::move(table));
    return out;
}

namespace {

struct ConfigLines {
    std::map<std::string, std::vector<std::string>> values;

    const std::vector<std::string>& get(const std::string& key, std::size_t arity) const {
        auto it = values.find(key);
        if (it == values.end()) throw ConfigError("missing model key '" + key + "'");
        if (it->second.size() != arity)
            throw ConfigError("model key '" + key + "' expects " + std::to_string(arity) + " values");
        return it->second;
    }

    double num(const std::string& key) const {
        return std::stod(get(key, 1)[0]);
    }
};

ConfigLines read_config(std::istream& in) {
    ConfigLines cfg;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::vector<std::string> vals;
        std::string v;
        while (ls >> v) vals.push_back(v);
        if (cfg.values.count(key) && key != "word") throw ConfigError("duplicate model key '" + key + "'");
        auto& slot = cfg.values[key];
        if (key == "word") {
            if (vals.size() != 2) throw ConfigError("word lines expect '<bits> <mass>'");
            slot.push_back(vals[0]);
            slot.push_back(vals[1]);
        } else {
            slot = vals;
        }
    }
    return cfg;
}

std::unique_ptr<SourceModel> build_model(const ConfigLines& cfg, const std::string& prefix) {
    const std::string type = cfg.get(prefix + "type", 1)[0];
    if (type == "coin") return std::make_unique<CoinModel>(cfg.num(prefix + "p"));
    if (type == "product") {
        auto it = cfg.values.find(prefix + "probs");
        if (it == cfg.values.end() || it->second.empty()) throw ConfigError("product model needs 'probs'");
        std::vector<double> ps;
        for (const auto& s : it->second) ps.push_back(std::stod(s));
        return std::make_unique<ProductModel>(std::move(ps));
    }
    if (type == "markov") {
        auto pair = [&](const std::string& key) {
            const auto& v = cfg.get(prefix + key, 2);
            return std::array<double, 2>{std::stod(v[0]), std::stod(v[1])};
        };
        return std::make_unique<MarkovModel>(pair("init"), pair("row0"), pair("row1"));
    }
    if (type == "interval") {
        std::string policy = "worst";
        auto it = cfg.values.find(prefix + "policy");
        if (it != cfg.values.end()) {
            if (it->second.size() != 1) throw ConfigError("policy expects one value");
            policy = it->second[0];
        }
        return std::make_unique<IntervalCoinModel>(cfg.num(prefix + "lo"), cfg.num(prefix + "hi"),
                                                   interval_policy_from_string(policy));
    }
    if (type == "explicit") {
        auto it = cfg.values.find(prefix + "word");
        if (it == cfg.values.end()) throw ConfigError("explicit model needs 'word' lines");
        std::vector<std::pair<BitSequence, double>> table;
        for (std::size_t i = 0; i + 1 < it->second.size(); i += 2)
            table.emplace_back(BitSequence::from_string(it->second[i]), std::stod(it->second[i + 1]));
        return std::make_unique<ExplicitModel>(std::move(table));
    }
    throw ConfigError("unknown model type '" + type + "'");
}

} // namespace

ParsedModelConfig parse_model_config(std::istream& in) {
    ConfigLines cfg = read_config(in);
    ParsedModelConfig out;
    const std::string type = cfg.get("type", 1)[0];
    if (type == "grouping") {
        out.is_grouping = true;
        out.grouping_beta = cfg.num("beta");
        out.grouping_base = build_model(cfg, "base.");
        return out;
    }
    out.model = build_model(cfg, "");
    return out;
}

std::unique_ptr<SourceModel> model_from_config(std::istream& in) {
    ParsedModelConfig parsed = parse_model_config(in);
    if (parsed.is_grouping)
        throw ConfigError("grouping models need a stopping set; only 'verify --source' accepts them");
    return std::move(parsed.model);
}

std::unique_ptr<SourceModel> model_from_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open model file '" + path + "'");
    return model_from_config(f);
}

} // namespace vlx
