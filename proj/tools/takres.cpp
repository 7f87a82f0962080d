// takres: command-line front end for the reservoir prediction, Takens
// diagnostic, hybrid-readout, and neuron-control experiments.
//
// Exit codes: 0 success, 2 configuration error, 3 divergence-dominated result.

#include "takres/harness.hpp"
#include "takres/takens_analysis.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>

using namespace takres;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergent = 3;

long default_workers() {
    if (const char* env = std::getenv("TAKRES_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 0) return v;
    }
    return 0;  // library default: hardware concurrency
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-")
        std::cout << content;
    else
        write_file_atomic(out_path, content);
}

// Options shared by every experiment subcommand.
struct ExperimentArgs {
    std::string config_path;
    std::string scale;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    long workers = -1;
};

void add_experiment_command(CLI::App& app, const std::string& name,
                            const std::string& desc,
                            std::vector<std::pair<std::string, ExperimentArgs>>& jobs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    auto args = std::make_shared<ExperimentArgs>();
    sub->add_option("--config", args->config_path, "JSON experiment config");
    sub->add_option("--scale", args->scale, "ensemble preset: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    sub->add_option("--seed", args->seed, "override the base seed");
    sub->add_option("--out", args->out_dir, "output directory");
    sub->add_option("--workers", args->workers, "worker thread count");
    sub->callback([name, args, &jobs] { jobs.emplace_back(name, *args); });
    // remember whether --seed was given (0 is a legal seed)
    sub->parse_complete_callback([sub, args] {
        args->seed_set = sub->count("--seed") > 0;
    });
}

int run_experiment_command(const std::string& name, const ExperimentArgs& args) {
    ExperimentConfig config = args.config_path.empty()
                                  ? default_config(name)
                                  : load_config(args.config_path);
    config.experiment = name;
    if (args.scale == "desk") apply_scale(config, Scale::Desk);
    if (args.scale == "paper") apply_scale(config, Scale::Paper);
    if (args.seed_set) {
        config.ensemble.base_seed = args.seed;
        config.control.predictor.seed = args.seed;
        config.control.hybrid_base.seed = args.seed;
        config.control.classic_base.seed = args.seed;
    }
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    if (args.workers >= 0) config.workers = args.workers;
    if (config.workers == 0) config.workers = default_workers();

    const RunRecord rec = run_experiment(config);
    std::cout << "experiment: " << rec.experiment << "\n"
              << "config hash: " << rec.hash << "\n"
              << "summary: " << rec.summary_json << "\n";
    for (const std::string& f : rec.files) std::cout << "wrote: " << f << "\n";
    if (rec.divergence_dominated) {
        std::cerr << "result is divergence-dominated (> 90% divergent runs)\n";
        return kExitDivergent;
    }
    return kExitOk;
}

// Input series for the diagnostic subcommands: a CSV file or a freshly
// generated Mackey-Glass sequence.
TimeSeries diagnostic_series(const std::string& input_path, long mg_samples,
                             std::uint64_t seed) {
    if (!input_path.empty()) return read_time_series(input_path);
    return gen_mackey_glass(MGParams{}, mg_samples, MGHistory{}, seed);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"takres: reservoir prediction, Takens diagnostics, hybrid "
                 "delayed readouts, and neuron spike-timing control"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, ExperimentArgs>> jobs;
    add_experiment_command(app, "predict",
                           "ensemble prediction benchmark (Mackey-Glass)", jobs);
    add_experiment_command(app, "scan-tau",
                           "scan the readout window position tau0_net", jobs);
    add_experiment_command(app, "scan-mu",
                           "scan the bifurcation parameter mu with "
                           "distortion bounds", jobs);
    add_experiment_command(app, "trrnn",
                           "single hybrid delayed-readout ensemble run", jobs);
    add_experiment_command(app, "scan-delay",
                           "scan the hybrid readout delay tau_T", jobs);
    add_experiment_command(app, "fhn-control",
                           "closed-loop spike-timing control of the "
                           "stochastic neuron", jobs);
    add_experiment_command(app, "node-sweep",
                           "stabilization vs node count, both architectures",
                           jobs);

    // ----------------------------------------------------- embed diagnostics
    CLI::App* embed = app.add_subcommand(
        "embed", "delay-embedding diagnostics on a series");
    embed->require_subcommand(1);
    embed->fallthrough();  // shared options may follow the nested subcommand
    std::string em_input, em_out;
    long em_samples = 10000, em_max_lag = 60, em_tau0 = -12, em_M = 4;
    std::uint64_t em_seed = 1;
    embed->add_option("--input", em_input,
                      "input series CSV (default: generated Mackey-Glass)");
    embed->add_option("--samples", em_samples, "generated series length");
    embed->add_option("--seed", em_seed, "generation seed");
    embed->add_option("--out", em_out, "output CSV path (default stdout)");
    CLI::App* em_acf = embed->add_subcommand("acf", "autocorrelation table");
    em_acf->add_option("--max-lag", em_max_lag, "largest lag");
    CLI::App* em_fnn =
        embed->add_subcommand("fnn", "false-nearest-neighbor fractions");
    em_fnn->add_option("--tau0", em_tau0, "embedding lag");
    em_fnn->add_option("--max-M", em_M, "largest dimension tested");
    CLI::App* em_embed =
        embed->add_subcommand("embed", "delay-coordinate matrix");
    em_embed->add_option("--tau0", em_tau0, "embedding lag");
    em_embed->add_option("--M", em_M, "embedding dimension");

    // ------------------------------------------------------- cca and bounds
    std::string an_out;
    long an_m = 1000, an_lag_lo = -60, an_lag_hi = 60, an_train = 3000,
         an_washout = 1400, an_tau0 = -12, an_M = 4;
    double an_mu = 1.1;
    std::uint64_t an_seed = 1;
    auto add_analysis_opts = [&](CLI::App* sub) {
        sub->add_option("--m", an_m, "network size");
        sub->add_option("--mu", an_mu, "bifurcation parameter");
        sub->add_option("--seed", an_seed, "base seed (network + sequence)");
        sub->add_option("--train-len", an_train, "drive length");
        sub->add_option("--washout", an_washout, "washout length");
        sub->add_option("--lag-lo", an_lag_lo, "lowest lag");
        sub->add_option("--lag-hi", an_lag_hi, "highest lag");
        sub->add_option("--out", an_out, "output CSV path (default stdout)");
    };
    CLI::App* cca_cmd = app.add_subcommand(
        "cca", "per-node cross-correlation profile of one driven network");
    add_analysis_opts(cca_cmd);
    CLI::App* bounds_cmd = app.add_subcommand(
        "bounds", "distortion bounds of one network's implicit projection");
    add_analysis_opts(bounds_cmd);
    bounds_cmd->add_option("--tau0", an_tau0, "Takens embedding lag");
    bounds_cmd->add_option("--M", an_M, "Takens embedding dimension");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        for (const auto& [name, args] : jobs)
            if (int rc = run_experiment_command(name, args); rc != kExitOk)
                return rc;

        if (embed->parsed()) {
            const TimeSeries ts = diagnostic_series(em_input, em_samples, em_seed);
            std::ostringstream csv;
            if (em_acf->parsed()) {
                const std::vector<double> rho = acf(ts, em_max_lag);
                csv << "lag,value\n";
                for (std::size_t k = 0; k < rho.size(); ++k)
                    csv << k << "," << fmt(rho[k]) << "\n";
                std::cerr << "tau0 (first |acf| minimum): " << select_tau0(rho)
                          << "\n";
            } else if (em_fnn->parsed()) {
                const FnnResult fnn = false_nearest_neighbors(ts, em_tau0, em_M);
                csv << "M,fraction\n";
                for (std::size_t k = 0; k < fnn.fractions.size(); ++k)
                    csv << (k + 1) << "," << fmt(fnn.fractions[k]) << "\n";
                if (fnn.m_min)
                    std::cerr << "minimum embedding dimension: " << *fnn.m_min
                              << "\n";
            } else {
                const DelayMatrix dm = delay_embed(ts, {em_tau0, em_M});
                for (long c = 0; c < dm.rows.cols(); ++c)
                    csv << (c ? "," : "") << "x" << c;
                csv << "\n";
                for (long r = 0; r < dm.rows.rows(); ++r) {
                    for (long c = 0; c < dm.rows.cols(); ++c)
                        csv << (c ? "," : "") << fmt(dm.rows(r, c));
                    csv << "\n";
                }
            }
            emit(em_out, csv.str());
        }

        if (cca_cmd->parsed() || bounds_cmd->parsed()) {
            EnsembleConfig ec;
            ec.m = an_m;
            ec.mu = an_mu;
            ec.train_len = an_train;
            ec.washout = an_washout;
            ec.base_seed = an_seed;
            const auto seeds = seed_schedule(an_seed, 1, 1);
            const Reservoir res = build_reservoir(ec.m, ec.mu, ec.alpha, ec.b,
                                                  seeds[0].network_seed);
            const MgTask task = make_mg_task(ec, seeds[0].sequence_seed);
            const StateMatrix st = drive(res, task.train, nullptr, ec.washout);
            const long rows = task.train.size() - ec.washout;
            Eigen::VectorXd input_post = task.train.values.tail(rows);
            const CcaProfile profile =
                cca_profile(st.X, input_post, an_lag_lo, an_lag_hi);
            std::ostringstream csv;
            if (cca_cmd->parsed()) {
                csv << "node_id,best_lag,cc_max\n";
                for (std::size_t n = 0; n < profile.best_lag.size(); ++n)
                    csv << n << "," << profile.best_lag[n] << ","
                        << fmt(profile.cc_max[n]) << "\n";
            } else {
                TimeSeries post;
                post.values = input_post;
                const DelayMatrix dm = delay_embed(post, {an_tau0, an_M});
                const long trim = (an_M - 1) * std::labs(an_tau0);
                const EpsilonBounds eb = epsilon_bounds(
                    dm, st.X.bottomRows(rows - trim), profile);
                csv << "eps1,eps2,eps_min,eps_max,h\n"
                    << fmt(eb.eps1) << "," << fmt(eb.eps2) << ","
                    << fmt(eb.eps_min) << "," << fmt(eb.eps_max) << "," << eb.h
                    << "\n";
            }
            emit(an_out, csv.str());
        }
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
