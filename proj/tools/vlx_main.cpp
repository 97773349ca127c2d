// vlx: variable-length randomness extraction toolkit.
//
// Subcommands: extract (stream bits through a stopping rule and the
// universal-hash back end), verify (exact desk-scale check of the distance
// and min-entropy claims), analyze (efficiency trends and the fixed-length
// baseline), rankcodec (combinatorial ranking and LZ parsing helpers).
//
// Payload goes to stdout (or --out); diagnostics go to stderr. Exit codes:
// 0 success, 1 verification failed, 2 config error, 3 input exhausted,
// 4 budget or threshold refusal.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "vlx/codec.hpp"
#include "vlx/errors.hpp"
#include "vlx/oracle.hpp"
#include "vlx/pipeline.hpp"

namespace {

using namespace vlx;

struct ModelBundle {
    std::unique_ptr<SourceModel> stopping;  // model the stopping rule trusts
    std::unique_ptr<SourceModel> source;    // realized source (verify/analyze)
    std::optional<double> derived_beta;     // from interval uncertainty
    std::optional<std::pair<double, double>> interval; // lo, hi when applicable
    bool grouping = false;
    double grouping_beta = 0.0;
    std::unique_ptr<SourceModel> grouping_base;
};

ParsedModelConfig parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open model file '" + path + "'");
    return parse_model_config(f);
}

// For an interval model the stopping rule runs on its best coin
// approximation and the uncertainty defaults to the minimized divergence.
ModelBundle load_models(const std::string& model_path, const std::string& source_path) {
    ModelBundle bundle;
    ParsedModelConfig main_cfg = parse_file(model_path);
    if (main_cfg.is_grouping) throw ConfigError("a grouping synthesis can only be the --source of verify");
    if (auto* interval = dynamic_cast<IntervalCoinModel*>(main_cfg.model.get())) {
        OptimalCoin oc = optimal_coin_model(interval->lo(), interval->hi());
        bundle.stopping = std::make_unique<CoinModel>(oc.q);
        bundle.derived_beta = oc.beta;
        bundle.interval = std::make_pair(interval->lo(), interval->hi());
        bundle.source = std::move(main_cfg.model);
    } else {
        bundle.stopping = std::move(main_cfg.model);
    }
    if (!source_path.empty()) {
        ParsedModelConfig source_cfg = parse_file(source_path);
        if (source_cfg.is_grouping) {
            bundle.grouping = true;
            bundle.grouping_beta = source_cfg.grouping_beta;
            bundle.grouping_base = std::move(source_cfg.grouping_base);
        } else {
            bundle.source = std::move(source_cfg.model);
        }
    }
    return bundle;
}

struct PlanFlags {
    int m = 1;
    double eps = 0.25;
    double beta = -1.0; // negative = unset
    double eps_p = -1.0;
    double eps_lz = 0.1;
    double threshold = -1.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--m", m, "output bits")->required();
        cmd->add_option("--eps", eps, "statistical distance target")->required();
        cmd->add_option("--beta", beta, "source uncertainty (default: derived for intervals, else 0)");
        cmd->add_option("--eps-p", eps_p, "finite-size slack on beta (default 0.01 when beta > 0)");
        cmd->add_option("--eps-lz", eps_lz, "LZ gap parameter")->capture_default_str();
        cmd->add_option("--threshold", threshold, "override the stopping threshold");
    }

    ThresholdPlan plan(const ModelBundle& bundle) const {
        double b = beta >= 0.0 ? beta : bundle.derived_beta.value_or(0.0);
        std::optional<double> ep;
        if (eps_p >= 0.0) ep = eps_p;
        std::optional<double> t;
        if (threshold >= 0.0) t = threshold;
        return ThresholdPlan::from_params(m, eps, b, ep, t, eps_lz);
    }
};

struct BudgetFlags {
    std::size_t max_support = std::size_t{1} << 20;
    std::size_t exact_seed_bits = 20;
    std::size_t seed_samples = 10000;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--max-support", max_support, "stopping-set enumeration cap")->capture_default_str();
        cmd->add_option("--exact-seed-bits", exact_seed_bits, "exact seed averaging up to this length")->capture_default_str();
        cmd->add_option("--seed-samples", seed_samples, "sampled seeds beyond the exact cap")->capture_default_str();
    }

    OracleBudget budget() const { return OracleBudget{max_support, exact_seed_bits, seed_samples}; }
};

BitSequence resolve_seed(const std::string& seed_text, std::size_t seed_length) {
    if (seed_text == "os") {
        std::random_device rd;
        BitSequence seed;
        unsigned word = 0;
        int avail = 0;
        for (std::size_t i = 0; i < seed_length; ++i) {
            if (avail == 0) {
                word = rd();
                avail = 32;
            }
            --avail;
            seed.push_back((word >> avail) & 1);
        }
        return seed;
    }
    return seed_from_hex(seed_text, seed_length);
}

int cmd_extract(const std::string& construction, const std::string& model_path, const PlanFlags& flags,
                const std::string& seed_text, const std::string& in_path, const std::string& out_path,
                std::size_t length_cap) {
    Frontend f = frontend_from_string(construction);
    ModelBundle bundle;
    if (!model_path.empty()) bundle = load_models(model_path, "");
    if (f == Frontend::Known && !bundle.stopping) throw ConfigError("--construction known requires --model");

    StopLimits limits;
    limits.length_cap = length_cap;
    SeededVlx vlx = make_seeded_vlx(f, bundle.stopping.get(), flags.plan(bundle), limits);
    set_seed(vlx, resolve_seed(seed_text, vlx.spec.seed_length()));

    // config is fully validated; only now touch the input stream
    std::ifstream in_file;
    std::istream* in = &std::cin;
    if (in_path != "-") {
        in_file.open(in_path, std::ios::binary);
        if (!in_file) throw ConfigError("cannot open input '" + in_path + "'");
        in = &in_file;
    }
    StreamBitReader reader(*in);
    ExtractResult result = extract_seeded(vlx, reader);

    PackedBits packed = pack(result.output);
    std::ofstream out_file;
    std::ostream* out = &std::cout;
    if (out_path != "-") {
        out_file.open(out_path, std::ios::binary);
        if (!out_file) throw ConfigError("cannot open output '" + out_path + "'");
        out = &out_file;
    }
    out->write(reinterpret_cast<const char*>(packed.bytes.data()),
               static_cast<std::streamsize>(packed.bytes.size()));
    out->flush();

    std::cerr << "construction=" << construction << " m=" << vlx.plan.m << " k=" << vlx.plan.k
              << " eps=" << vlx.plan.eps << " beta=" << vlx.plan.beta << " beta_p=" << vlx.plan.beta_p
              << " T=" << vlx.plan.threshold << " n=" << vlx.spec.n << " seed_length=" << vlx.spec.seed_length()
              << "\n";
    std::cerr << "seed=" << seed_to_hex(vlx.seed) << "\n";
    std::cerr << "consumed=" << result.consumed << " bits_written=" << result.output.size() << "\n";
    return 0;
}

int cmd_verify(const std::string& construction, const std::string& model_path, const std::string& source_path,
               const PlanFlags& flags, const BudgetFlags& budget_flags) {
    Frontend f = frontend_from_string(construction);
    ModelBundle bundle = load_models(model_path, source_path);
    if (f == Frontend::Known && !bundle.stopping) throw ConfigError("--construction known requires --model");

    SeededVlx vlx = make_seeded_vlx(f, bundle.stopping.get(), flags.plan(bundle));
    OracleBudget budget = budget_flags.budget();

    std::unique_ptr<SourceModel> grouped;
    const SourceModel* source = bundle.source ? bundle.source.get() : bundle.stopping.get();
    if (bundle.grouping) {
        StopLimits limits = vlx.limits;
        limits.set_budget = budget.max_support;
        std::vector<BitSequence> sp = enumerate_stop_set(f, bundle.stopping.get(), vlx.plan, limits);
        GroupingSource g = grouping_source(*bundle.grouping_base, sp, bundle.grouping_beta);
        grouped = std::move(g.model);
        source = grouped.get();
    }
    if (source == nullptr) throw ConfigError("verify needs a source model (--model or --source)");

    PipelineReport rep = verify_pipeline(vlx, *source, budget);

    std::cout.precision(12);
    std::cout << "construction " << construction << "\n";
    std::cout << "model " << (bundle.stopping ? bundle.stopping->describe() : "-") << "\n";
    std::cout << "source " << source->describe() << "\n";
    std::cout << "m " << rep.m << "\n";
    std::cout << "k " << rep.k << "\n";
    std::cout << "eps " << rep.eps << "\n";
    std::cout << "threshold " << vlx.plan.threshold << "\n";
    std::cout << "n " << rep.n << "\n";
    std::cout << "seed_length " << rep.seed_length << "\n";
    std::cout << "support " << rep.support_size << "\n";
    std::cout << "distance " << rep.distance_to_uniform << "\n";
    std::cout << "distance_marginal " << rep.distance_marginal << "\n";
    std::cout << "minentropy_Z " << rep.minentropy_Z << "\n";
    std::cout << "entropy_Z " << rep.entropy_Z << "\n";
    std::cout << "entropy_X " << rep.entropy_X << "\n";
    std::cout << "entropy_output " << rep.entropy_output << "\n";
    std::cout << "expected_input_length " << rep.expected_input_length << "\n";
    std::cout << "efficiency " << rep.efficiency << "\n";
    std::cout << "efficiency_with_seed " << rep.efficiency_with_seed << "\n";
    std::cout << "seed_averaging " << (rep.seed_sampled ? "sampled" : "exact") << "\n";
    std::cout << "seed_count " << rep.seed_count << "\n";

    bool pass = rep.distance_to_uniform <= rep.eps + 1e-9 && rep.minentropy_Z >= rep.k - 1e-9;
    std::cout << "verdict " << (pass ? "pass" : "fail") << "\n";
    return pass ? 0 : 1;
}

int cmd_analyze(const std::string& construction, const std::string& model_path, const std::string& source_path,
                const std::string& m_list, double eps, bool k_equals_m, double beta, double eps_p, double eps_lz,
                const BudgetFlags& budget_flags) {
    Frontend f = frontend_from_string(construction);
    ModelBundle bundle = load_models(model_path, source_path);
    if (f == Frontend::Known && !bundle.stopping) throw ConfigError("--construction known requires --model");
    const SourceModel* source = bundle.source ? bundle.source.get() : bundle.stopping.get();
    if (bundle.grouping) throw ConfigError("analyze does not accept grouping sources");
    if (source == nullptr) throw ConfigError("analyze needs a source model");

    std::vector<int> ms;
    std::stringstream ss(m_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        ms.push_back(std::stoi(tok));
    }
    if (ms.empty()) throw ConfigError("--m-list needs at least one value");

    TrendOptions options;
    options.eps = eps;
    options.k_equals_m = k_equals_m;
    options.beta = beta >= 0.0 ? beta : bundle.derived_beta.value_or(0.0);
    if (eps_p >= 0.0) options.eps_p = eps_p;
    options.eps_lz = eps_lz;

    std::optional<EfficiencyInterval> baseline;
    if (bundle.interval) baseline = fixed_length_baseline(bundle.interval->first, bundle.interval->second);
    if (bundle.derived_beta) std::cerr << "beta " << *bundle.derived_beta << "\n";

    std::vector<TrendRow> rows =
        efficiency_trend(f, bundle.stopping.get(), *source, ms, options, budget_flags.budget());
    std::cout.precision(10);
    std::cout << "m,consumed_mean,entropy_X,eta,eta_with_seed,eta_fixed_lo,eta_fixed_hi\n";
    for (const TrendRow& row : rows) {
        std::cout << row.m << "," << row.consumed_mean << "," << row.entropy_X << "," << row.eta << ","
                  << row.eta_with_seed << ",";
        if (baseline)
            std::cout << baseline->lo << "," << baseline->hi;
        else
            std::cout << ",";
        std::cout << "\n";
    }
    return 0;
}

int cmd_rankcodec(const std::vector<std::string>& args) {
    if (args.empty()) throw ConfigError("rankcodec needs a mode: rank | unrank | lzparse");
    const std::string& mode = args[0];
    if (mode == "rank") {
        if (args.size() != 2) throw ConfigError("usage: rankcodec rank <bits>");
        std::cout << rank(BitSequence::from_string(args[1])).to_string() << "\n";
        return 0;
    }
    if (mode == "unrank") {
        if (args.size() != 4) throw ConfigError("usage: rankcodec unrank <length> <ones> <rank>");
        std::size_t length = std::stoul(args[1]);
        std::size_t ones = std::stoul(args[2]);
        BigUint r(std::stoull(args[3]));
        std::cout << unrank(length, ones, r).to_string() << "\n";
        return 0;
    }
    if (mode == "lzparse") {
        if (args.size() != 3) throw ConfigError("usage: rankcodec lzparse <bits> <phrases>");
        SequenceBitReader in(BitSequence::from_string(args[1]));
        auto codes = lz_parse(in, std::stoul(args[2]));
        for (const auto& code : codes) std::cout << code.prefix_index << " " << code.last_bit << "\n";
        std::cerr << "consumed=" << in.consumed() << "\n";
        return 0;
    }
    throw ConfigError("unknown rankcodec mode '" + mode + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"variable-length randomness extraction toolkit"};
    app.require_subcommand(1);

    std::string construction = "known", model_path, source_path, seed_text;
    std::string in_path = "-", out_path = "-", m_list = "2,4,6,8";
    std::size_t length_cap = std::size_t{1} << 16;
    PlanFlags extract_flags, verify_flags;
    BudgetFlags budget_flags;
    double an_eps = 0.5, an_beta = -1.0, an_eps_p = -1.0, an_eps_lz = 0.1;
    bool an_k_equals_m = false;
    std::vector<std::string> rank_args;

    CLI::App* extract = app.add_subcommand("extract", "extract m almost-uniform bits from a bit stream");
    extract->add_option("--construction", construction, "known | coin | lz")->required();
    extract->add_option("--model", model_path, "model config (required for known)");
    extract_flags.add_to(extract);
    extract->add_option("--seed", seed_text, "hex seed or 'os'")->required();
    extract->add_option("--in", in_path, "input path or - for stdin")->capture_default_str();
    extract->add_option("--out", out_path, "output path or - for stdout")->capture_default_str();
    extract->add_option("--length-cap", length_cap, "max input bits per extraction")->capture_default_str();

    CLI::App* verify = app.add_subcommand("verify", "exact verification of distance and min-entropy");
    verify->add_option("--construction", construction, "known | coin | lz")->required();
    verify->add_option("--model", model_path, "stopping model config")->required();
    verify->add_option("--source", source_path, "realized source config (default: the model)");
    verify_flags.add_to(verify);
    budget_flags.add_to(verify);

    CLI::App* analyze = app.add_subcommand("analyze", "efficiency trend over a list of m");
    analyze->add_option("--construction", construction, "known | coin | lz")->required();
    analyze->add_option("--model", model_path, "model config")->required();
    analyze->add_option("--source", source_path, "realized source config");
    analyze->add_option("--m-list", m_list, "comma-separated output sizes")->capture_default_str();
    analyze->add_option("--eps", an_eps, "distance target for the planner")->capture_default_str();
    analyze->add_flag("--k-equals-m", an_k_equals_m, "measure the alpha -> 0 regime (k = m)");
    analyze->add_option("--beta", an_beta, "source uncertainty (default: derived)");
    analyze->add_option("--eps-p", an_eps_p, "finite-size slack");
    analyze->add_option("--eps-lz", an_eps_lz, "LZ gap parameter")->capture_default_str();
    budget_flags.add_to(analyze);

    CLI::App* rankcodec = app.add_subcommand("rankcodec", "combinatorial rank/unrank and LZ parsing");
    rankcodec->add_option("args", rank_args, "rank <bits> | unrank <len> <ones> <rank> | lzparse <bits> <phrases>");

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed())
            return cmd_extract(construction, model_path, extract_flags, seed_text, in_path, out_path, length_cap);
        if (verify->parsed()) return cmd_verify(construction, model_path, source_path, verify_flags, budget_flags);
        if (analyze->parsed())
            return cmd_analyze(construction, model_path, source_path, m_list, an_eps, an_k_equals_m, an_beta,
                               an_eps_p, an_eps_lz, budget_flags);
        if (rankcodec->parsed()) return cmd_rankcodec(rank_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const StreamExhausted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
