// Acceptance suite: one line per criterion, exit code = number of failures.
// Heavy ensemble checks run at desk scale (5 networks x 5 sequences).

#include "takres/harness.hpp"
#include "takres/rng.hpp"
#include "takres/takens_analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

using namespace takres;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void progress(const char* what) {
    std::fprintf(stderr, "[acceptance] %s\n", what);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

EnsembleConfig desk_config() {
    EnsembleConfig c;  // library defaults are the benchmark parameterization
    c.n_networks = 5;
    c.n_sequences = 5;
    return c;
}

// Capped ensemble mean: divergent runs count at the 1e6 cap instead of being
// dropped, so "lower is better" comparisons cannot hide instability.
double capped_mean(const EnsembleSummary& s) { return s.mean_nmse_all; }

// Full-history reference for the ring-buffer free run. Kept out of line so its
// floating-point expressions compile exactly as in the library loop; inlining
// it into a larger function lets the compiler contract operations differently
// and breaks bitwise comparison in the last bit.
__attribute__((noinline)) ClosedLoopResult full_history_reference_loop(
    const TrrnnSpec& spec, const ReadoutModel& model,
    const std::vector<Eigen::VectorXd>& history, double y_start, long horizon) {
    const long depth = std::labs(spec.tau_T);
    const Reservoir& res = spec.base;
    const Eigen::MatrixXd Wmu = res.mu * res.W;
    const Eigen::VectorXd offset = res.W_off * res.b;
    std::vector<Eigen::VectorXd> all(history.begin(), history.end());
    ClosedLoopResult result;
    result.output.values.resize(horizon);
    double y = y_start;
    for (long i = 0; i < horizon; ++i) {
        result.output.values[i] = y;
        const Eigen::VectorXd x =
            (Wmu * all.back() + res.alpha * y * res.W_in + offset)
                .array()
                .tanh();
        all.push_back(x);
        const Eigen::VectorXd& delayed = all[all.size() - 1 - depth];
        Eigen::VectorXd feature(2 * res.m);
        feature.head(res.m) = x;
        feature.tail(res.m) = delayed;
        y = model.w_out.dot(feature);
    }
    return result;
}

// ---------------------------------------------------------------- criteria

double criterion_1_benchmark() {
    progress("criterion 1: desk-scale prediction benchmark (25 runs, m=1000)");
    const EnsembleSummary s = ensemble_benchmark(desk_config());
    const bool pass = s.mean_nmse >= 0.03 && s.mean_nmse <= 0.3 &&
                      s.divergence_pct < 20.0;
    report(1, pass,
           "ensemble mean NMSE " + num(s.mean_nmse) + " (target [0.03, 0.3]), " +
               "divergence " + num(s.divergence_pct) + "% (target < 20%)");
    return capped_mean(s);
}

void criterion_2_embedding() {
    progress("criterion 2: embedding diagnostics on 1e4 samples");
    const TimeSeries ts = gen_mackey_glass(MGParams{}, 10000, MGHistory{}, 1);
    const long tau0 = select_tau0(acf(ts, 60));
    const FnnResult fnn = false_nearest_neighbors(ts, tau0, 6);
    const long m_min = fnn.m_min.value_or(-1);
    const bool pass = tau0 == -12 && m_min >= 3 && m_min <= 5;
    report(2, pass,
           "embedding lag " + std::to_string(tau0) + " (target -12), minimum "
           "dimension " + std::to_string(m_min) + " (target 4 +/- 1)");
}

void criterion_3_cca() {
    progress("criterion 3: cross-correlation structure at mu=1.1 and mu=0.1");
    const EnsembleConfig base = desk_config();
    const auto seeds = seed_schedule(base.base_seed, base.n_networks,
                                     base.n_sequences);
    long spread_lo = 0, spread_hi = 0;
    long concentrated = 0, total = 0;
    for (const auto& sp : seeds) {
        const MgTask task = make_mg_task(base, sp.sequence_seed);
        for (double mu : {1.1, 0.1}) {
            const Reservoir res = build_reservoir(base.m, mu, base.alpha,
                                                  base.b, sp.network_seed);
            const StateMatrix st = drive(res, task.train, nullptr, base.washout);
            const Eigen::VectorXd post =
                task.train.values.tail(task.train.size() - base.washout);
            const CcaProfile p = cca_profile(st.X, post, -60, 60);
            if (mu == 1.1) {
                spread_lo = std::min(spread_lo, p.l_min);
                spread_hi = std::max(spread_hi, p.l_max);
            } else {
                for (std::size_t i = 0; i < p.best_lag.size(); ++i) {
                    if (p.flagged[i]) continue;
                    ++total;
                    const long lag = p.best_lag[i];
                    if (std::abs(lag) <= 4 || std::abs(lag + 24) <= 4)
                        ++concentrated;
                }
            }
        }
    }
    const double frac =
        total > 0 ? static_cast<double>(concentrated) / total : 0.0;
    const bool pass = spread_lo <= -40 && spread_hi >= 35 && frac >= 0.70;
    report(3, pass,
           "mu=1.1 lag spread [" + std::to_string(spread_lo) + ", " +
               std::to_string(spread_hi) + "] (target covers [-40, 35]); "
               "mu=0.1 concentration " + num(100.0 * frac) +
               "% within +/-4 of {-24, 0} (target >= 70%)");
}

void criterion_4_tau_scan() {
    progress("criterion 4: readout window scan (4 positions + baseline)");
    ScanConfig config;
    config.base = desk_config();
    const TauScanResult res = tau_scan(config, {-12, -11, -3, -2});
    const double base = capped_mean(res.baseline);
    auto row = [&](long tau) -> const TauScanRow& {
        for (const auto& r : res.rows)
            if (r.tau0_net == tau) return r;
        throw std::logic_error("missing scan row");
    };
    const double good12 = capped_mean(row(-12).summary);
    const double good11 = capped_mean(row(-11).summary);
    const double bad3 = capped_mean(row(-3).summary);
    const double bad2 = capped_mean(row(-2).summary);
    const double nodes12 = row(-12).mean_nodes;
    const double nodes11 = row(-11).mean_nodes;
    const bool pass = good12 <= base && good11 <= base && nodes12 >= 400.0 &&
                      nodes12 <= 600.0 && nodes11 >= 400.0 &&
                      nodes11 <= 600.0 && bad3 >= 2.0 * base &&
                      bad2 >= 2.0 * base;
    report(4, pass,
           "baseline " + num(base) + "; window -12: " + num(good12) + " (" +
               num(nodes12) + " nodes), -11: " + num(good11) + " (" +
               num(nodes11) + " nodes) — both must be <= baseline with "
               "400-600 nodes; window -3: " + num(bad3) + ", -2: " + num(bad2) +
               " — both must be >= 2x baseline");
}

void criterion_5_mu_scan() {
    progress("criterion 5: mu scan with distortion bounds (7 values)");
    ScanConfig config;
    config.base = desk_config();
    const std::vector<double> grid = {0.1, 0.45, 0.5, 0.55, 0.6, 1.1, 1.5};
    const std::vector<MuScanRow> rows = mu_scan(config, grid);

    bool contractive_band = false;  // some mu: eps2 < 1 with > 90% divergence
    double band_mu = 0.0;
    const MuScanRow* best = nullptr;
    const MuScanRow* row15 = nullptr;
    for (const auto& r : rows) {
        if (r.summary.divergence_pct > 90.0 && r.eps2 < 1.0 &&
            !contractive_band) {
            contractive_band = true;
            band_mu = r.mu;
        }
        if (r.summary.divergence_pct < 50.0 && std::isfinite(r.summary.mean_nmse) &&
            (!best || r.summary.mean_nmse < best->summary.mean_nmse))
            best = &r;
        if (r.mu == 1.5) row15 = &r;
    }
    bool pass = contractive_band && best && row15;
    std::string detail;
    if (best && row15) {
        const bool edge = best->eps1 <= 1.05 && best->eps2 >= 1.0;
        const bool worse = row15->summary.mean_nmse >=
                           5.0 * best->summary.mean_nmse;
        pass = pass && edge && worse;
        detail = "divergence-dominated band with eps2 < 1 " +
                 std::string(contractive_band ? "found at mu=" + num(band_mu)
                                              : "not found") +
                 "; best mu=" + num(best->mu) + " (NMSE " +
                 num(best->summary.mean_nmse) + ") has eps1=" +
                 num(best->eps1) + " (target <= ~1) and eps2=" +
                 num(best->eps2) + " (target >= 1); mu=1.5 NMSE " +
                 num(row15->summary.mean_nmse) + " (target >= 5x best)";
    } else {
        detail = "scan produced no usable best-mu or mu=1.5 row";
    }
    report(5, pass, detail);
}

void criterion_6_delay_scan(double baseline_capped_nmse) {
    progress("criterion 6: hybrid readout delay scan (tau -16..-6)");
    DelayScanConfig config;  // zero-noise base, m=350, mu=0.1
    config.base.n_networks = 5;
    config.base.n_sequences = 5;
    std::vector<long> grid;
    for (long t = -16; t <= -6; ++t) grid.push_back(t);
    const std::vector<DelayScanRow> rows = delay_scan(config, grid);
    long best_tau = 0;
    double best = -1.0;
    for (const auto& r : rows) {
        const double v = capped_mean(r.summary);
        if (best < 0.0 || v < best) {
            best = v;
            best_tau = r.tau_T;
        }
    }
    const bool pass = best_tau >= -14 && best_tau <= -9 &&
                      best <= baseline_capped_nmse;
    report(6, pass,
           "minimum mean NMSE " + num(best) + " at delay " +
               std::to_string(best_tau) +
               " (target in [-14, -9]); 1000-node baseline " +
               num(baseline_capped_nmse) + " (target: minimum <= baseline)");
}

void criterion_7_control() {
    progress("criterion 7a: oracle-sensor demand pacing (1e6 samples)");
    NodeSweepConfig sweep;  // desk defaults: run_len 1e6
    PredictorSpec oracle;   // kind = Oracle
    const ControlRunReport orep = run_controlled(
        sweep.fhn, oracle, sweep.ctrl, sweep.train_len, sweep.run_len, sweep.seed);

    progress("criterion 7b/7c: node sweep, both architectures (10 runs)");
    const std::vector<NodeSweepRow> rows = node_sweep(sweep);
    long hybrid_min = -1, classic_min = -1;
    bool small_hybrid_ok = false;    // some hybrid <= 30 nodes stabilizes
    bool small_classic_fails = true; // every classic <= 30 nodes fails
    for (const auto& r : rows) {
        if (r.kind == PredictorKind::Hybrid) {
            if (r.stabilized && (hybrid_min < 0 || r.nodes < hybrid_min))
                hybrid_min = r.nodes;
            if (r.stabilized && r.nodes <= 30) small_hybrid_ok = true;
        } else {
            if (r.stabilized && (classic_min < 0 || r.nodes < classic_min))
                classic_min = r.nodes;
            if (r.stabilized && r.nodes <= 30) small_classic_fails = false;
        }
    }
    const bool pass_a = orep.stabilized && orep.isi_cv < 0.05;
    const bool pass_b = small_hybrid_ok && small_classic_fails;
    const bool pass_c = hybrid_min > 0 && classic_min > 0 &&
                        classic_min >= 5 * hybrid_min;
    report(7, pass_a && pass_b && pass_c,
           "(a) oracle pacing stabilized=" +
               std::string(orep.stabilized ? "yes" : "no") + " with ISI CV " +
               num(orep.isi_cv) + " (target < 0.05); (b) delayed-readout "
               "sensor with <= 30 nodes stabilizes: " +
               std::string(small_hybrid_ok ? "yes" : "no") +
               ", plain sensor of equal size fails: " +
               std::string(small_classic_fails ? "yes" : "no") +
               "; (c) smallest stabilizing plain sensor " +
               std::to_string(classic_min) + " nodes vs delayed-readout " +
               std::to_string(hybrid_min) + " (target ratio >= 5)");
}

void criterion_8_invariants() {
    progress("criterion 8: exact invariant suite");
    std::vector<std::string> broken;

    // spectral radius 1 +/- 1e-6 over 20 seeds
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Reservoir res = build_reservoir(60, 1.1, 0.8, 0.2, seed);
        Eigen::EigenSolver<Eigen::MatrixXd> solver(res.W, false);
        if (std::abs(solver.eigenvalues().cwiseAbs().maxCoeff() - 1.0) > 1e-6) {
            broken.push_back("spectral radius");
            break;
        }
    }

    // least-squares residual orthogonal to the feature columns
    {
        Rng rng(4);
        Eigen::MatrixXd F(200, 12);
        Eigen::VectorXd t(200);
        for (long r = 0; r < 200; ++r) {
            for (long c = 0; c < 12; ++c) F(r, c) = rng.uniform(-1.0, 1.0);
            t[r] = rng.uniform(-1.0, 1.0);
        }
        const ReadoutModel model = train_readout(F, t);
        if ((F.transpose() * (t - F * model.w_out)).cwiseAbs().maxCoeff() >=
            1e-8)
            broken.push_back("residual orthogonality");
    }

    // distortion bounds sandwich every consecutive sample pair
    {
        Rng rng(31);
        Eigen::VectorXd input(600);
        for (long i = 0; i < 600; ++i) input[i] = rng.uniform(-1.0, 1.0);
        const long n = 580;
        Eigen::MatrixXd states(n, 3);
        states.col(0) = input.tail(n);
        states.col(1) = input.segment(16, n);
        states.col(2) = input.segment(11, n);
        TimeSeries post;
        post.values = input.tail(n);
        const EmbeddingSpec spec{-3, 4};
        const DelayMatrix embed = delay_embed(post, spec);
        const Eigen::MatrixXd phi = states.bottomRows(n - 9);
        const CcaProfile profile = cca_profile(states, post.values, -15, 15);
        const EpsilonBounds eb =
            epsilon_bounds(embed, phi, profile, EpsilonMode::PerPairRatio);
        const double jl = std::sqrt(static_cast<double>(spec.M) / eb.h);
        for (long r = 0; r + 1 < phi.rows(); ++r) {
            const double den =
                (embed.rows.row(r + 1) - embed.rows.row(r)).norm();
            if (den <= 0.0) continue;
            const double ratio =
                jl * (phi.row(r + 1) - phi.row(r)).norm() / den;
            if (ratio < eb.eps_min - 1e-12 || ratio > eb.eps_max + 1e-12) {
                broken.push_back("epsilon sandwich");
                break;
            }
        }
    }

    // ring-buffer free run equals a full-history reference over 1e3 steps
    {
        const Reservoir res = build_reservoir(15, 1.1, 0.8, 0.2, 23);
        const TimeSeries input =
            gen_mackey_glass(MGParams{}, 500, MGHistory{}, 8);
        const TrrnnSpec spec{-7, res};
        const AugmentedStateMatrix aug = drive_augmented(spec, input, 80);
        ReadoutModel model;
        Rng rng(99);
        model.w_out.resize(30);
        for (long i = 0; i < 30; ++i) model.w_out[i] = rng.uniform(-0.2, 0.2);
        const ClosedLoopResult fast =
            trrnn_predict_closed_loop(spec, model, aug.tail_states, 0.3, 1000);
        const ClosedLoopResult ref =
            full_history_reference_loop(spec, model, aug.tail_states, 0.3, 1000);
        const bool same = fast.output.size() == 1000 && !fast.divergent &&
                          fast.output.values == ref.output.values;
        if (!same) broken.push_back("ring-buffer equivalence");
    }

    // brute-force lag profile equals the library result bit-exactly (m <= 10)
    {
        const Reservoir res = build_reservoir(8, 1.1, 0.8, 0.2, 21);
        const TimeSeries input =
            gen_mackey_glass(MGParams{}, 800, MGHistory{}, 4);
        const StateMatrix st = drive(res, input, nullptr, 100);
        const Eigen::VectorXd post = input.values.tail(700);
        const CcaProfile fast = cca_profile(st.X, post, -30, 30);
        for (long i = 0; i < 8; ++i) {
            const std::vector<double> cc =
                cross_correlation(st.X.col(i), post, -30, 30);
            long arg = 0;
            double val = -1.0;
            for (long a = 0; a <= 30; ++a)
                for (long k : {-a, a}) {
                    if (k == 0 && a != 0) continue;
                    const double v = std::abs(cc[static_cast<std::size_t>(k + 30)]);
                    if (v > val) {
                        val = v;
                        arg = k;
                    }
                }
            if (fast.best_lag[static_cast<std::size_t>(i)] != arg ||
                fast.cc_max[static_cast<std::size_t>(i)] != val) {
                broken.push_back("brute-force lag profile");
                break;
            }
        }
    }

    // byte-identical reruns for a fixed seed
    {
        EnsembleConfig c;
        c.m = 40;
        c.train_len = 900;
        c.washout = 300;
        c.horizon = 30;
        c.n_networks = 2;
        c.n_sequences = 2;
        const EnsembleSummary a = ensemble_benchmark(c);
        const EnsembleSummary b = ensemble_benchmark(c);
        bool same = a.runs.size() == b.runs.size();
        for (std::size_t k = 0; same && k < a.runs.size(); ++k)
            same = a.runs[k].nmse == b.runs[k].nmse;
        if (!same) broken.push_back("seeded reproducibility");
    }

    std::string detail;
    if (broken.empty()) {
        detail = "spectral radius, residual orthogonality, distortion "
                 "sandwich, ring-buffer equivalence, brute-force lag profile, "
                 "and seeded reproducibility all hold";
    } else {
        detail = "violated:";
        for (const auto& b : broken) detail += " " + b + ";";
    }
    report(8, broken.empty(), detail);
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const double baseline = criterion_1_benchmark();
    criterion_2_embedding();
    criterion_3_cca();
    criterion_4_tau_scan();
    criterion_5_mu_scan();
    criterion_6_delay_scan(baseline);
    criterion_7_control();
    criterion_8_invariants();
    const auto dt = std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::printf("%d criterion checks failed (total %lld s)\n", failures,
                static_cast<long long>(dt));
    return failures;
}
