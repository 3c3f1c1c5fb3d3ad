// labelsim: budgeted labeling simulation under noisy oracles.
//
// Subcommands: curves, simulate, poker equity|sample, chi, mnist-relabel.
// Exit codes: 0 success, 1 usage/config error, 2 runtime error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "labelsim/campaign.hpp"
#include "labelsim/core.hpp"
#include "labelsim/format.hpp"
#include "labelsim/mnist_io.hpp"
#include "labelsim/oracle.hpp"
#include "labelsim/poker.hpp"
#include "labelsim/policy.hpp"
#include "labelsim/stats.hpp"

namespace {

using labelsim::format_double;

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::vector<double> parse_double_list(const std::string& text, const std::string& field) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(field + ": invalid number '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(field + ": empty list");
    return out;
}

// Comma list of integers where each element may be a single value or an
// inclusive range a-b, e.g. "1,3,5-8".
std::vector<int> parse_int_list(const std::string& text, const std::string& field) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    auto to_int = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(field + ": invalid integer '" + s + "'");
        }
    };
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-', 1); // allow a leading minus to fail as a value
        if (dash != std::string::npos) {
            const int lo = to_int(item.substr(0, dash));
            const int hi = to_int(item.substr(dash + 1));
            if (hi < lo) throw ConfigError(field + ": empty range '" + item + "'");
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            out.push_back(to_int(item));
        }
    }
    if (out.empty()) throw ConfigError(field + ": empty list");
    return out;
}

labelsim::poker::HoleCards parse_hole(const std::string& text, const std::string& field) {
    const auto cards = labelsim::poker::parse_cards(text);
    if (cards.size() != 2) throw ConfigError(field + ": expected 2 cards, got '" + text + "'");
    return {cards[0], cards[1]};
}

labelsim::poker::Flop parse_flop(const std::string& text, const std::string& field) {
    const auto cards = labelsim::poker::parse_cards(text);
    if (cards.size() != 3) throw ConfigError(field + ": expected 3 cards, got '" + text + "'");
    return {cards[0], cards[1], cards[2]};
}

// ---------------------------------------------------------------------------
// curves

struct CurvesOptions {
    int classes = 10;
    std::string noise_list;
    std::string v_list = "1-100";
    std::int64_t trials = 100000;
    std::uint64_t seed = 0;
    std::string out_path;
    int threads = 1;
};

struct CurveRow {
    double w = 0.0;
    int v = 0;
    labelsim::stats::MajorityProbResult exact;
    labelsim::stats::MonteCarloEstimate mc;
};

int run_curves(const CurvesOptions& opt) {
    const auto noises = parse_double_list(opt.noise_list, "--noise");
    const auto vs = parse_int_list(opt.v_list, "--validations");
    if (opt.classes < 2) throw ConfigError("--classes: need at least 2");
    if (opt.trials < 1) throw ConfigError("--trials: need at least 1");
    if (opt.threads < 1) throw ConfigError("--threads: need at least 1");
    const double upper = static_cast<double>(opt.classes - 1) / static_cast<double>(opt.classes);
    for (double w : noises) {
        if (!(w >= 0.0) || w > upper) {
            throw ConfigError("--noise: w=" + format_double(w) +
                              " leaves the correct label less probable than an incorrect one "
                              "(need 0 <= w <= " + format_double(upper) + ")");
        }
    }
    for (int v : vs) {
        if (v < 1) throw ConfigError("--validations: must be >= 1");
    }

    std::vector<CurveRow> rows(noises.size() * vs.size());
    auto compute_cell = [&](std::size_t cell) {
        const std::size_t wi = cell / vs.size();
        const std::size_t vi = cell % vs.size();
        CurveRow& row = rows[cell];
        row.w = noises[wi];
        row.v = vs[vi];
        const double q = 1.0 - row.w;
        row.exact = labelsim::stats::strict_majority_prob_exact(opt.classes, q, row.v);
        auto rng = labelsim::derive_stream(opt.seed, static_cast<std::uint64_t>(cell));
        row.mc = labelsim::stats::majority_prob_mc(opt.classes, q, row.v, opt.trials, rng);
    };
    const auto ncells = rows.size();
    const auto nworkers = std::min<std::size_t>(static_cast<std::size_t>(opt.threads), ncells);
    if (nworkers <= 1) {
        for (std::size_t cell = 0; cell < ncells; ++cell) compute_cell(cell);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(nworkers);
        for (std::size_t t = 0; t < nworkers; ++t) {
            workers.emplace_back([&, t] {
                try {
                    for (std::size_t cell = t; cell < ncells; cell += nworkers) {
                        compute_cell(cell);
                    }
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& w : workers) w.join();
        for (const auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
    }

    std::ofstream out(opt.out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot create " + opt.out_path);
    out << "l,w,v,strict_prob,tie_resolved_prob,mc_mean,mc_stderr\n";
    for (const auto& row : rows) {
        out << opt.classes << ',' << format_double(row.w) << ',' << row.v << ','
            << format_double(row.exact.strict_prob) << ','
            << format_double(row.exact.tie_resolved_prob) << ',' << format_double(row.mc.mean)
            << ',' << format_double(row.mc.std_error) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + opt.out_path);
    std::cout << "wrote " << rows.size() << " rows to " << opt.out_path << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
    std::string config_path;
    // flag overrides; empty/negative = not set
    std::string oracle_kind;
    int classes = -1;
    double noise = -1.0;
    std::string p1, p2, flop;
    std::string policy;
    std::int64_t s_max = -1;
    std::int64_t examples = -1;
    std::optional<std::uint64_t> seed;
    std::string out_csv;
    std::string out_summary;
    int threads = -1;
};

struct RunConfig {
    std::string oracle_kind = "uniform";
    int classes = 10;
    double noise = 0.0;
    std::string p1, p2, flop;
    labelsim::Policy policy;
    std::string policy_text;
    std::int64_t s_max = 0;
    std::int64_t examples = 0;
    std::uint64_t master_seed = 0;
    bool have_seed = false;
    std::string out_csv = "campaign.csv";
    std::string out_summary = "summary.txt";
    int threads = 1;
};

RunConfig load_config(const SimulateOptions& opt) {
    RunConfig cfg;
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw ConfigError("config: cannot open " + opt.config_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config: " + std::string(e.what()));
        }
        try {
            if (j.contains("oracle")) {
                const auto& o = j.at("oracle");
                cfg.oracle_kind = o.value("kind", "uniform");
                if (o.contains("classes")) cfg.classes = o.at("classes").get<int>();
                if (o.contains("noise")) cfg.noise = o.at("noise").get<double>();
                if (o.contains("p1")) cfg.p1 = o.at("p1").get<std::string>();
                if (o.contains("p2")) cfg.p2 = o.at("p2").get<std::string>();
                if (o.contains("flop")) cfg.flop = o.at("flop").get<std::string>();
            }
            if (j.contains("policy")) cfg.policy_text = j.at("policy").get<std::string>();
            if (j.contains("s_max")) cfg.s_max = j.at("s_max").get<std::int64_t>();
            if (j.contains("examples")) cfg.examples = j.at("examples").get<std::int64_t>();
            if (j.contains("master_seed")) {
                cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
                cfg.have_seed = true;
            }
            if (j.contains("out_csv")) cfg.out_csv = j.at("out_csv").get<std::string>();
            if (j.contains("out_summary")) cfg.out_summary = j.at("out_summary").get<std::string>();
            if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config: " + std::string(e.what()));
        }
    }

    if (!opt.oracle_kind.empty()) cfg.oracle_kind = opt.oracle_kind;
    if (opt.classes >= 0) cfg.classes = opt.classes;
    if (opt.noise >= 0.0) cfg.noise = opt.noise;
    if (!opt.p1.empty()) cfg.p1 = opt.p1;
    if (!opt.p2.empty()) cfg.p2 = opt.p2;
    if (!opt.flop.empty()) cfg.flop = opt.flop;
    if (!opt.policy.empty()) cfg.policy_text = opt.policy;
    if (opt.s_max >= 0) cfg.s_max = opt.s_max;
    if (opt.examples >= 0) cfg.examples = opt.examples;
    if (opt.seed) {
        cfg.master_seed = *opt.seed;
        cfg.have_seed = true;
    }
    if (!opt.out_csv.empty()) cfg.out_csv = opt.out_csv;
    if (!opt.out_summary.empty()) cfg.out_summary = opt.out_summary;
    if (opt.threads >= 1) cfg.threads = opt.threads;

    // Validate everything up front; nothing is written on failure.
    if (cfg.oracle_kind != "uniform" && cfg.oracle_kind != "poker") {
        throw ConfigError("oracle.kind: expected 'uniform' or 'poker', got '" + cfg.oracle_kind +
                          "'");
    }
    if (cfg.oracle_kind == "uniform") {
        if (cfg.classes < 2) throw ConfigError("oracle.classes: need at least 2");
        if (!(cfg.noise >= 0.0) ||
            cfg.noise > static_cast<double>(cfg.classes - 1) / static_cast<double>(cfg.classes)) {
            throw ConfigError("oracle.noise: must lie in [0, (l-1)/l]");
        }
    } else {
        if (cfg.p1.empty() || cfg.p2.empty() || cfg.flop.empty()) {
            throw ConfigError("oracle: poker oracle needs p1, p2 and flop");
        }
    }
    if (cfg.policy_text.empty()) throw ConfigError("policy: missing");
    try {
        cfg.policy = labelsim::parse_policy(cfg.policy_text);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("policy: " + std::string(e.what()));
    }
    if (cfg.s_max < 1) throw ConfigError("s_max: need at least 1");
    if (cfg.examples < 1) throw ConfigError("examples: need at least 1");
    if (!cfg.have_seed) throw ConfigError("master_seed: missing (randomized runs need a seed)");
    if (cfg.threads < 1) throw ConfigError("threads: need at least 1");
    return cfg;
}

int run_simulate(const SimulateOptions& opt) {
    const RunConfig cfg = load_config(opt);

    std::unique_ptr<labelsim::Oracle> oracle;
    std::vector<labelsim::Example> examples;
    examples.reserve(static_cast<std::size_t>(cfg.examples));
    if (cfg.oracle_kind == "uniform") {
        oracle = std::make_unique<labelsim::UniformNoiseOracle>(cfg.classes, cfg.noise);
        for (std::int64_t i = 0; i < cfg.examples; ++i) {
            examples.push_back(labelsim::Example{
                i, static_cast<labelsim::LabelId>(i % cfg.classes), {}});
        }
    } else {
        auto poker_oracle = std::make_unique<labelsim::poker::PokerShowdownOracle>(
            parse_hole(cfg.p1, "oracle.p1"), parse_hole(cfg.p2, "oracle.p2"),
            parse_flop(cfg.flop, "oracle.flop"));
        const labelsim::LabelId truth = poker_oracle->correct_label();
        for (std::int64_t i = 0; i < cfg.examples; ++i) {
            examples.push_back(labelsim::Example{i, truth, {}});
        }
        oracle = std::move(poker_oracle);
    }

    const auto result = labelsim::run_campaign(*oracle, cfg.policy, cfg.s_max, examples,
                                               cfg.master_seed, cfg.threads);
    const auto summary = labelsim::summarize(result);

    {
        std::ofstream csv(cfg.out_csv, std::ios::trunc);
        if (!csv) throw std::runtime_error("cannot create " + cfg.out_csv);
        labelsim::write_campaign_csv(csv, result);
        if (!csv) throw std::runtime_error("write failed for " + cfg.out_csv);
    }
    {
        std::ofstream sum(cfg.out_summary, std::ios::trunc);
        if (!sum) throw std::runtime_error("cannot create " + cfg.out_summary);
        labelsim::write_summary(sum, summary);
        if (!sum) throw std::runtime_error("write failed for " + cfg.out_summary);
    }
    labelsim::write_summary(std::cout, summary);
    return 0;
}

// ---------------------------------------------------------------------------
// poker

struct PokerOptions {
    std::string p1, p2, flop;
    std::int64_t n = 100000;
    std::optional<std::uint64_t> seed;
};

int run_poker_equity(const PokerOptions& opt) {
    const auto p1 = parse_hole(opt.p1, "--p1");
    const auto p2 = parse_hole(opt.p2, "--p2");
    const auto flop = parse_flop(opt.flop, "--flop");
    const auto eq = labelsim::poker::exact_showdown_equity(p1, p2, flop);
    std::cout << "p1=" << opt.p1 << '\n' << "p2=" << opt.p2 << '\n' << "flop=" << opt.flop << '\n';
    std::cout << "rivers=" << eq.rivers << '\n';
    std::cout << "p1_wins=" << eq.win1_count << '\n';
    std::cout << "p2_wins=" << eq.win2_count << '\n';
    std::cout << "ties=" << eq.tie_count << '\n';
    std::cout << "p1_share=" << format_double(eq.p1_share()) << '\n';
    std::cout << "p2_share=" << format_double(eq.p2_share()) << '\n';
    return 0;
}

int run_poker_sample(const PokerOptions& opt) {
    const auto p1 = parse_hole(opt.p1, "--p1");
    const auto p2 = parse_hole(opt.p2, "--p2");
    const auto flop = parse_flop(opt.flop, "--flop");
    if (opt.n < 1) throw ConfigError("--n: need at least 1");
    if (!opt.seed) throw ConfigError("--seed: required for sampling");
    const auto deck = labelsim::poker::remaining_deck(p1, p2, flop);
    auto rng = labelsim::derive_stream(*opt.seed, 0);
    std::int64_t w1 = 0, w2 = 0, ties = 0;
    for (std::int64_t i = 0; i < opt.n; ++i) {
        const auto [r1, r2] = labelsim::poker::sample_river(deck, rng);
        switch (labelsim::poker::showdown(p1, p2, flop, r1, r2)) {
            case labelsim::poker::ShowdownOutcome::P1Wins: ++w1; break;
            case labelsim::poker::ShowdownOutcome::P2Wins: ++w2; break;
            case labelsim::poker::ShowdownOutcome::Tie: ++ties; break;
        }
    }
    const auto n = static_cast<double>(opt.n);
    std::cout << "samples=" << opt.n << '\n';
    std::cout << "p1_win_freq=" << format_double(static_cast<double>(w1) / n) << '\n';
    std::cout << "p2_win_freq=" << format_double(static_cast<double>(w2) / n) << '\n';
    std::cout << "tie_freq=" << format_double(static_cast<double>(ties) / n) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// chi

int run_chi(const std::vector<std::int64_t>& counts) {
    if (counts.size() < 2) throw ConfigError("chi: need at least 2 counts");
    for (std::int64_t c : counts) {
        if (c < 0) throw ConfigError("chi: counts must be non-negative");
    }
    labelsim::VoteTally tally(counts);
    if (tally.total() < 1) throw ConfigError("chi: total count must be >= 1");
    const double stat = labelsim::stats::chi_square_statistic(tally);
    const double p = labelsim::stats::chi_square_p_value(tally);
    std::cout << "statistic=" << format_double(stat) << '\n';
    std::cout << "df=" << counts.size() - 1 << '\n';
    std::cout << "p_value=" << format_double(p) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// mnist-relabel

struct MnistOptions {
    std::string labels_path;
    std::string images_path;
    double noise = 0.0;
    std::string policy;
    std::int64_t s_max = 0;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int threads = 1;
};

int run_mnist_relabel(const MnistOptions& opt) {
    labelsim::Policy policy;
    try {
        policy = labelsim::parse_policy(opt.policy);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("--policy: " + std::string(e.what()));
    }
    if (!(opt.noise >= 0.0) || opt.noise > 0.9) {
        throw ConfigError("--noise: must lie in [0, 0.9] for 10 classes");
    }
    if (opt.s_max < 1) throw ConfigError("--smax: need at least 1");
    if (!opt.seed) throw ConfigError("--seed: required");
    if (opt.threads < 1) throw ConfigError("--threads: need at least 1");

    const auto labels = labelsim::mnist::read_idx_labels(opt.labels_path);
    if (!opt.images_path.empty()) {
        const auto images = labelsim::mnist::read_idx_images(opt.images_path);
        if (images.count != labels.count()) {
            throw ConfigError("--images: image count " + std::to_string(images.count) +
                              " does not match label count " + std::to_string(labels.count()));
        }
    }

    const auto out = labelsim::mnist::relabel_campaign(labels, opt.noise, policy, opt.s_max,
                                                       *opt.seed, opt.out_dir, opt.threads);
    labelsim::write_summary(std::cout, labelsim::summarize(out.result));
    std::cout << "labels_file=" << out.labels_path.string() << '\n';
    std::cout << "csv_file=" << out.csv_path.string() << '\n';
    std::cout << "summary_file=" << out.summary_path.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"budgeted labeling simulation under noisy oracles"};
    app.require_subcommand(1);

    CurvesOptions curves;
    auto* cmd_curves = app.add_subcommand(
        "curves", "exact and Monte Carlo majority-vote correctness curves");
    cmd_curves->add_option("-l,--classes", curves.classes, "number of classes");
    cmd_curves->add_option("--noise", curves.noise_list, "comma list of noise levels w")
        ->required();
    cmd_curves->add_option("--validations", curves.v_list,
                           "validation counts (comma list, ranges like 1-100 allowed)");
    cmd_curves->add_option("--trials", curves.trials, "Monte Carlo trials per grid cell");
    cmd_curves->add_option("--seed", curves.seed, "master seed")->required();
    cmd_curves->add_option("--out", curves.out_path, "output CSV path")->required();
    cmd_curves->add_option("--threads", curves.threads, "worker threads");

    SimulateOptions sim;
    auto* cmd_simulate = app.add_subcommand("simulate", "run a labeling campaign");
    cmd_simulate->add_option("--config", sim.config_path, "JSON config file");
    cmd_simulate->add_option("--oracle", sim.oracle_kind, "oracle kind: uniform|poker");
    cmd_simulate->add_option("--classes", sim.classes, "uniform oracle classes");
    cmd_simulate->add_option("--noise", sim.noise, "uniform oracle noise w");
    cmd_simulate->add_option("--p1", sim.p1, "poker oracle: first hand, e.g. 'Qh Js'");
    cmd_simulate->add_option("--p2", sim.p2, "poker oracle: second hand");
    cmd_simulate->add_option("--flop", sim.flop, "poker oracle: flop, e.g. '2s 9s Ts'");
    cmd_simulate->add_option("--policy", sim.policy,
                             "policy spec, e.g. fixed:v=5 | scheduled:stages=1,3,5,7;frac=0.1 | "
                             "chi:threshold=0.05;cap=0");
    cmd_simulate->add_option("--smax", sim.s_max, "query budget");
    cmd_simulate->add_option("--examples", sim.examples, "number of streamed examples");
    std::uint64_t sim_seed = 0;
    auto* sim_seed_opt = cmd_simulate->add_option("--seed", sim_seed, "master seed");
    cmd_simulate->add_option("--out-csv", sim.out_csv, "per-example CSV path");
    cmd_simulate->add_option("--out-summary", sim.out_summary, "summary path");
    cmd_simulate->add_option("--threads", sim.threads, "worker threads");

    auto* cmd_poker = app.add_subcommand("poker", "showdown equity tools");
    cmd_poker->require_subcommand(1);
    PokerOptions pk;
    auto* cmd_equity = cmd_poker->add_subcommand("equity", "exact river-enumeration equity");
    auto* cmd_sample = cmd_poker->add_subcommand("sample", "Monte Carlo showdown sampling");
    for (auto* c : {cmd_equity, cmd_sample}) {
        c->add_option("--p1", pk.p1, "first hand, e.g. 'Qh Js'")->required();
        c->add_option("--p2", pk.p2, "second hand")->required();
        c->add_option("--flop", pk.flop, "flop, e.g. '2s 9s Ts'")->required();
    }
    std::uint64_t pk_seed = 0;
    cmd_sample->add_option("--n", pk.n, "number of sampled rivers");
    auto* pk_seed_opt = cmd_sample->add_option("--seed", pk_seed, "master seed")->required();

    std::vector<std::int64_t> chi_counts;
    auto* cmd_chi = app.add_subcommand("chi", "chi-square uniformity p-value for a tally");
    cmd_chi->add_option("counts", chi_counts, "per-label observation counts")->required();

    MnistOptions mn;
    auto* cmd_mnist = app.add_subcommand("mnist-relabel",
                                         "relabel an IDX label file through a noisy oracle");
    cmd_mnist->add_option("--labels", mn.labels_path, "IDX label file")->required();
    cmd_mnist->add_option("--images", mn.images_path,
                          "IDX image file (optional; checked for count match)");
    cmd_mnist->add_option("--noise", mn.noise, "noise level w")->required();
    cmd_mnist->add_option("--policy", mn.policy, "policy spec")->required();
    cmd_mnist->add_option("--smax", mn.s_max, "query budget")->required();
    std::uint64_t mn_seed = 0;
    auto* mn_seed_opt = cmd_mnist->add_option("--seed", mn_seed, "master seed")->required();
    cmd_mnist->add_option("--out", mn.out_dir, "output directory")->required();
    cmd_mnist->add_option("--threads", mn.threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (sim_seed_opt->count()) sim.seed = sim_seed;
    if (pk_seed_opt->count()) pk.seed = pk_seed;
    if (mn_seed_opt->count()) mn.seed = mn_seed;

    try {
        if (app.got_subcommand(cmd_curves)) return run_curves(curves);
        if (app.got_subcommand(cmd_simulate)) return run_simulate(sim);
        if (app.got_subcommand(cmd_poker)) {
            if (cmd_poker->got_subcommand(cmd_equity)) return run_poker_equity(pk);
            return run_poker_sample(pk);
        }
        if (app.got_subcommand(cmd_chi)) return run_chi(chi_counts);
        if (app.got_subcommand(cmd_mnist)) return run_mnist_relabel(mn);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
