#include "takres/takens_analysis.hpp"
#include "takres/parallel.hpp"
#include "takres/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace takres {

std::vector<double> cross_correlation(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& y, long lag_lo,
                                      long lag_hi) {
    const long n = x.size();
    if (n != y.size() || n < 2)
        throw ParameterError("cross_correlation: series must have equal length >= 2");
    if (lag_lo > lag_hi) throw ParameterError("cross_correlation: empty lag range");
    const Eigen::VectorXd xc = x.array() - x.mean();
    const Eigen::VectorXd yc = y.array() - y.mean();
    const double sx = xc.norm();
    const double sy = yc.norm();
    if (sx <= 0.0 || sy <= 0.0)
        throw DegenerateInputError("cross_correlation: zero-variance input");
    const double denom = sx * sy;  // == len * sd_biased(x) * sd_biased(y)

    std::vector<double> out(static_cast<std::size_t>(lag_hi - lag_lo + 1));
    for (long k = lag_lo; k <= lag_hi; ++k) {
        // pairs x_n with y_{n+k} over the valid overlap
        double sum = 0.0;
        if (k >= 0) {
            const long len = n - k;
            if (len > 0) sum = xc.head(len).dot(yc.tail(len));
        } else {
            const long len = n + k;
            if (len > 0) sum = xc.tail(len).dot(yc.head(len));
        }
        out[static_cast<std::size_t>(k - lag_lo)] = sum / denom;
    }
    return out;
}

CcaProfile cca_profile(const Eigen::MatrixXd& states, const Eigen::VectorXd& input,
                       long lag_lo, long lag_hi) {
    if (states.rows() != input.size())
        throw ParameterError("cca_profile: state rows must match input length");
    const long m = states.cols();
    CcaProfile profile;
    profile.best_lag.resize(static_cast<std::size_t>(m));
    profile.cc_max.resize(static_cast<std::size_t>(m));
    profile.flagged.resize(static_cast<std::size_t>(m));

    // lag visit order implementing the tie-break: 0, -1, +1, -2, +2, ...
    std::vector<long> order;
    order.reserve(static_cast<std::size_t>(lag_hi - lag_lo + 1));
    const long reach = std::max(std::abs(lag_lo), std::abs(lag_hi));
    for (long a = 0; a <= reach; ++a) {
        if (-a >= lag_lo && -a <= lag_hi) order.push_back(-a);
        if (a > 0 && a >= lag_lo && a <= lag_hi) order.push_back(a);
    }

    bool any = false;
    for (long i = 0; i < m; ++i) {
        std::vector<double> cc;
        try {
            cc = cross_correlation(states.col(i), input, lag_lo, lag_hi);
        } catch (const DegenerateInputError&) {
            profile.best_lag[static_cast<std::size_t>(i)] = 0;
            profile.cc_max[static_cast<std::size_t>(i)] = 0.0;
            profile.flagged[static_cast<std::size_t>(i)] = true;
            continue;
        }
        long best = 0;
        double best_val = -1.0;
        for (long k : order) {
            const double v = std::abs(cc[static_cast<std::size_t>(k - lag_lo)]);
            if (v > best_val) {
                best_val = v;
                best = k;
            }
        }
        profile.best_lag[static_cast<std::size_t>(i)] = best;
        profile.cc_max[static_cast<std::size_t>(i)] = best_val;
        profile.flagged[static_cast<std::size_t>(i)] = false;
        if (!any) {
            profile.l_min = profile.l_max = best;
            any = true;
        } else {
            profile.l_min = std::min(profile.l_min, best);
            profile.l_max = std::max(profile.l_max, best);
        }
    }
    return profile;
}

std::vector<long> window_filter(const CcaProfile& profile,
                                const WindowFilterSpec& spec) {
    if (spec.delta < 0) throw ParameterError("window_filter: delta must be >= 0");
    if (spec.M < 1) throw ParameterError("window_filter: M must be >= 1");
    std::vector<long> selected;
    const long m = static_cast<long>(profile.best_lag.size());
    for (long n = 0; n < spec.M; ++n) {
        const long center = n * spec.tau0_net;
        for (long i = 0; i < m; ++i) {
            if (profile.flagged[static_cast<std::size_t>(i)]) continue;
            if (std::abs(profile.best_lag[static_cast<std::size_t>(i)] - center) <=
                spec.delta)
                selected.push_back(i);
        }
    }
    return selected;
}

EpsilonBounds epsilon_bounds(const DelayMatrix& input_embed,
                             const Eigen::MatrixXd& states,
                             const CcaProfile& profile, EpsilonMode mode) {
    const long rows = input_embed.rows.rows();
    if (rows != states.rows())
        throw ParameterError("epsilon_bounds: Takens rows and state rows must align");
    if (rows < 2)
        throw ParameterError("epsilon_bounds: need at least 2 aligned rows");

    // phi coordinates: one per distinct lag in [l_min, l_max] — the node with
    // the strongest |CC| at that lag represents the delay coordinate. Ordered
    // by lag (std::map), so phi reads as a delay vector like the Takens state.
    std::map<long, long> rep;
    for (long i = 0; i < static_cast<long>(profile.best_lag.size()); ++i) {
        if (profile.flagged[static_cast<std::size_t>(i)]) continue;
        const long lag = profile.best_lag[static_cast<std::size_t>(i)];
        const auto it = rep.find(lag);
        if (it == rep.end() || profile.cc_max[static_cast<std::size_t>(i)] >
                                   profile.cc_max[static_cast<std::size_t>(it->second)])
            rep[lag] = i;
    }
    std::vector<long> cols;
    cols.reserve(rep.size());
    for (const auto& [lag, node] : rep) cols.push_back(node);
    const long h = static_cast<long>(cols.size());
    if (h == 0) throw ParameterError("epsilon_bounds: no nodes with defined lags");

    // Distances in the two spaces live in different dimensionalities (h vs M);
    // the random-projection comparison is per-coordinate RMS, so the ratio
    // carries a sqrt(M/h) factor (the usual Johnson-Lindenstrauss scaling).
    const double jl_scale =
        std::sqrt(static_cast<double>(input_embed.rows.cols()) /
                  static_cast<double>(h));

    EpsilonBounds out;
    out.h = h;
    if (mode == EpsilonMode::Aggregate) {
        double sum_min = 0.0, sum_max = 0.0;
        for (long c = 0; c < h; ++c) {
            const auto col = states.col(cols[static_cast<std::size_t>(c)]);
            double dmin = std::numeric_limits<double>::infinity();
            double dmax = 0.0;
            for (long n = 0; n + 1 < rows; ++n) {
                const double diff = col[n + 1] - col[n];
                const double d2 = diff * diff;
                dmin = std::min(dmin, d2);
                dmax = std::max(dmax, d2);
            }
            sum_min += dmin;
            sum_max += dmax;
        }
        double denom = 0.0;
        for (long n = 0; n + 1 < rows; ++n)
            denom += (input_embed.rows.row(n + 1) - input_embed.rows.row(n)).norm();
        denom /= static_cast<double>(rows - 1);
        if (denom <= 0.0)
            throw DegenerateInputError("epsilon_bounds: degenerate Takens trajectory");
        out.eps_min = jl_scale * std::sqrt(sum_min) / denom;
        out.eps_max = jl_scale * std::sqrt(sum_max) / denom;
    } else {
        double rmin = std::numeric_limits<double>::infinity();
        double rmax = 0.0;
        for (long n = 0; n + 1 < rows; ++n) {
            double num2 = 0.0;
            for (long c = 0; c < h; ++c) {
                const auto col = states.col(cols[static_cast<std::size_t>(c)]);
                const double diff = col[n + 1] - col[n];
                num2 += diff * diff;
            }
            const double den =
                (input_embed.rows.row(n + 1) - input_embed.rows.row(n)).norm();
            if (den <= 0.0) continue;  // coincident Takens states carry no ratio
            const double ratio = std::sqrt(num2) / den;
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
        }
        if (!std::isfinite(rmin))
            throw DegenerateInputError("epsilon_bounds: degenerate Takens trajectory");
        out.eps_min = jl_scale * rmin;
        out.eps_max = jl_scale * rmax;
    }
    out.eps1 = 1.0 - out.eps_min;
    out.eps2 = out.eps_max - 1.0;
    return out;
}

namespace {

struct PairOutcome {
    RunResult run;
    long n_nodes = 0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    bool eps_valid = false;
};

// Shared per-pair pipeline: drive once, then train/evaluate per filter.
struct DrivenPair {
    Reservoir res;
    MgTask task;
    StateMatrix states;
    CcaProfile profile;
};

DrivenPair prepare_pair(const ScanConfig& config, const SeedPair& sp, double mu) {
    DrivenPair p{build_reservoir(config.base.m, mu, config.base.alpha,
                                 config.base.b, sp.network_seed),
                 make_mg_task(config.base, sp.sequence_seed),
                 {},
                 {}};
    constexpr std::uint64_t kDriveTag = 0x6E6F697365ULL;  // "noise"
    p.states = drive(p.res, p.task.train, nullptr, config.base.washout,
                     config.base.train_noise,
                     mix64(sp.network_seed ^ kDriveTag));
    const Eigen::VectorXd input_post =
        p.task.train.values.tail(p.task.train.size() - config.base.washout);
    p.profile = cca_profile(p.states.X, input_post, config.lag_lo, config.lag_hi);
    return p;
}

RunResult evaluate_filtered(const ScanConfig& config, const DrivenPair& p,
                            const std::vector<long>* columns) {
    if (columns && columns->empty()) {
        RunResult r;
        r.nmse = 1e6;
        r.divergent = true;
        return r;
    }
    return run_prediction_from_states(p.res, p.task, p.states,
                                      TrainOptions::from(config.base), columns);
}

} // namespace

TauScanResult tau_scan(const ScanConfig& config, std::vector<long> tau_values) {
    const auto seeds = seed_schedule(config.base.base_seed, config.base.n_networks,
                                     config.base.n_sequences);
    const long n_pairs = static_cast<long>(seeds.size());
    const long n_tau = static_cast<long>(tau_values.size());

    std::vector<std::vector<RunResult>> per_tau(
        static_cast<std::size_t>(n_tau),
        std::vector<RunResult>(static_cast<std::size_t>(n_pairs)));
    std::vector<std::vector<double>> node_counts(
        static_cast<std::size_t>(n_tau),
        std::vector<double>(static_cast<std::size_t>(n_pairs), 0.0));
    std::vector<RunResult> baseline(static_cast<std::size_t>(n_pairs));

    parallel_for(n_pairs, config.workers, [&](long k) {
        const auto& sp = seeds[static_cast<std::size_t>(k)];
        const DrivenPair p = prepare_pair(config, sp, config.base.mu);
        RunResult base_run = evaluate_filtered(config, p, nullptr);
        base_run.network_id = sp.network_id;
        base_run.sequence_id = sp.sequence_id;
        baseline[static_cast<std::size_t>(k)] = base_run;
        for (long t = 0; t < n_tau; ++t) {
            const WindowFilterSpec spec{tau_values[static_cast<std::size_t>(t)],
                                        config.delta, config.windows_M};
            const std::vector<long> cols = window_filter(p.profile, spec);
            RunResult r = evaluate_filtered(config, p, &cols);
            r.network_id = sp.network_id;
            r.sequence_id = sp.sequence_id;
            per_tau[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] = r;
            node_counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] =
                static_cast<double>(cols.size());
        }
    });

    TauScanResult result;
    result.baseline = summarize(std::move(baseline));
    for (long t = 0; t < n_tau; ++t) {
        TauScanRow row;
        row.tau0_net = tau_values[static_cast<std::size_t>(t)];
        row.summary = summarize(std::move(per_tau[static_cast<std::size_t>(t)]));
        double sum = 0.0;
        for (double c : node_counts[static_cast<std::size_t>(t)]) sum += c;
        row.mean_nodes = sum / static_cast<double>(n_pairs);
        result.rows.push_back(std::move(row));
    }
    return result;
}

std::vector<MuScanRow> mu_scan(const ScanConfig& config,
                               const std::vector<double>& mu_values,
                               EpsilonMode mode) {
    const auto seeds = seed_schedule(config.base.base_seed, config.base.n_networks,
                                     config.base.n_sequences);
    const long n_pairs = static_cast<long>(seeds.size());
    const long n_mu = static_cast<long>(mu_values.size());

    std::vector<MuScanRow> rows(static_cast<std::size_t>(n_mu));
    std::vector<std::vector<PairOutcome>> outcomes(
        static_cast<std::size_t>(n_mu),
        std::vector<PairOutcome>(static_cast<std::size_t>(n_pairs)));

    parallel_for(n_mu * n_pairs, config.workers, [&](long idx) {
        const long u = idx / n_pairs;
        const long k = idx % n_pairs;
        const auto& sp = seeds[static_cast<std::size_t>(k)];
        const double mu = mu_values[static_cast<std::size_t>(u)];
        const DrivenPair p = prepare_pair(config, sp, mu);

        PairOutcome& out = outcomes[static_cast<std::size_t>(u)][static_cast<std::size_t>(k)];
        const WindowFilterSpec spec{config.takens.tau0, config.delta,
                                    config.windows_M};
        const std::vector<long> cols = window_filter(p.profile, spec);
        out.n_nodes = static_cast<long>(cols.size());
        out.run = evaluate_filtered(config, p, &cols);
        out.run.network_id = sp.network_id;
        out.run.sequence_id = sp.sequence_id;

        // distortion bounds on the Takens-aligned tail of the state rows
        const long trim = (config.takens.M - 1) * std::abs(config.takens.tau0);
        const long T = p.states.X.rows();
        if (T - trim >= 2) {
            TimeSeries input_post;
            input_post.values =
                p.task.train.values.tail(p.task.train.size() - config.base.washout);
            const DelayMatrix embed = delay_embed(input_post, config.takens);
            const Eigen::MatrixXd phi_rows = p.states.X.bottomRows(T - trim);
            try {
                const EpsilonBounds eb =
                    epsilon_bounds(embed, phi_rows, p.profile, mode);
                out.eps1 = eb.eps1;
                out.eps2 = eb.eps2;
                out.eps_valid = true;
            } catch (const DegenerateInputError&) {
                out.eps_valid = false;
            }
        }
    });

    for (long u = 0; u < n_mu; ++u) {
        MuScanRow& row = rows[static_cast<std::size_t>(u)];
        row.mu = mu_values[static_cast<std::size_t>(u)];
        std::vector<RunResult> runs;
        double e1 = 0.0, e2 = 0.0;
        long n_eps = 0;
        for (const auto& o : outcomes[static_cast<std::size_t>(u)]) {
            runs.push_back(o.run);
            if (o.eps_valid) {
                e1 += o.eps1;
                e2 += o.eps2;
                ++n_eps;
            }
        }
        row.summary = summarize(std::move(runs));
        if (n_eps > 0) {
            row.eps1 = e1 / static_cast<double>(n_eps);
            row.eps2 = e2 / static_cast<double>(n_eps);
        }
    }
    return rows;
}

} // namespace takres
