#include "takres/reservoir.hpp"
#include "takres/parallel.hpp"
#include "takres/rng.hpp"
#include "takres/signals.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace takres {

Reservoir build_reservoir(long m, double mu, double alpha, double b,
                          std::uint64_t seed) {
    if (m < 1) throw ParameterError("build_reservoir: m must be >= 1");
    Rng rng(seed);
    Reservoir res;
    res.m = m;
    res.mu = mu;
    res.alpha = alpha;
    res.b = b;
    res.seed = seed;
    res.W.resize(m, m);
    for (long i = 0; i < m; ++i)
        for (long j = 0; j < m; ++j) res.W(i, j) = rng.uniform(-1.0, 1.0);
    res.W_in.resize(m);
    for (long i = 0; i < m; ++i) res.W_in[i] = rng.uniform(-1.0, 1.0);
    res.W_off.resize(m);
    for (long i = 0; i < m; ++i) res.W_off[i] = rng.uniform(-1.0, 1.0);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(res.W, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw GenerationError("build_reservoir: eigenvalue computation failed");
    const double radius = solver.eigenvalues().cwiseAbs().maxCoeff();
    if (!(radius > 0.0))
        throw GenerationError("build_reservoir: zero spectral radius");
    res.W /= radius;
    return res;
}

StateMatrix drive(const Reservoir& res, const TimeSeries& input,
                  const Eigen::VectorXd* x0, long washout,
                  double state_noise, std::uint64_t noise_seed) {
    const long n = input.size();
    if (washout >= n) throw ParameterError("drive: washout must be < input length");
    Eigen::VectorXd x = x0 ? *x0 : Eigen::VectorXd::Zero(res.m);
    Rng noise_rng(noise_seed);

    StateMatrix out;
    out.washout = washout;
    out.X.resize(n - washout, res.m);
    const Eigen::MatrixXd Wmu = res.mu * res.W;
    const Eigen::VectorXd offset = res.W_off * res.b;
    for (long i = 0; i < n; ++i) {
        x = (Wmu * x + res.alpha * input.values[i] * res.W_in + offset)
                .array()
                .tanh();
        if (state_noise > 0.0)
            for (long k = 0; k < res.m; ++k)
                x[k] += state_noise * noise_rng.uniform(-1.0, 1.0);
        if (i >= washout) out.X.row(i - washout) = x.transpose();
    }
    out.final_state = x;
    return out;
}

ReadoutModel train_readout(const Eigen::MatrixXd& features,
                           const Eigen::VectorXd& teacher,
                           double svd_cutoff) {
    if (features.rows() != teacher.size())
        throw ParameterError("train_readout: feature rows must match teacher length");
    ReadoutModel model;
    model.rank_deficient = features.cols() >= features.rows();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(features,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(svd_cutoff);
    model.w_out = svd.solve(teacher);
    const Eigen::VectorXd fit = features * model.w_out;
    model.train_nmse = nmse(fit, teacher);
    return model;
}

double nmse(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target,
            NmseNorm norm) {
    if (prediction.size() != target.size() || target.size() < 2)
        throw ParameterError("nmse: series must have equal length >= 2");
    const double mean = target.mean();
    const double var = (target.array() - mean).square().mean();
    if (var <= 0.0) throw DegenerateInputError("nmse: constant target");
    const double mse = (prediction - target).squaredNorm() /
                       static_cast<double>(target.size());
    return norm == NmseNorm::Variance ? mse / var : mse / std::sqrt(var);
}

double nmse(const TimeSeries& prediction, const TimeSeries& target, NmseNorm norm) {
    return nmse(prediction.values, target.values, norm);
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X,
                               const std::vector<long>& columns) {
    Eigen::MatrixXd out(X.rows(), static_cast<long>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
        out.col(static_cast<long>(c)) = X.col(columns[c]);
    return out;
}

Eigen::VectorXd select_entries(const Eigen::VectorXd& x,
                               const std::vector<long>& columns) {
    Eigen::VectorXd out(static_cast<long>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
        out[static_cast<long>(c)] = x[columns[c]];
    return out;
}

ClosedLoopResult predict_closed_loop(const Reservoir& res, const ReadoutModel& model,
                                     const Eigen::VectorXd& x_start, double y_start,
                                     long horizon,
                                     const std::vector<long>* columns,
                                     double state_noise, std::uint64_t noise_seed) {
    if (horizon < 1) throw ParameterError("predict_closed_loop: horizon must be >= 1");
    ClosedLoopResult result;
    result.output.values.resize(horizon);
    Eigen::VectorXd x = x_start;
    double y = y_start;
    Rng noise_rng(noise_seed);
    const Eigen::MatrixXd Wmu = res.mu * res.W;
    const Eigen::VectorXd offset = res.W_off * res.b;
    for (long i = 0; i < horizon; ++i) {
        if (!std::isfinite(y)) {
            result.divergent = true;
            result.output.values.conservativeResize(i);
            return result;
        }
        result.output.values[i] = y;
        x = (Wmu * x + res.alpha * y * res.W_in + offset).array().tanh();
        if (state_noise > 0.0)
            for (long k = 0; k < res.m; ++k)
                x[k] += state_noise * noise_rng.uniform(-1.0, 1.0);
        y = columns ? model.w_out.dot(select_entries(x, *columns))
                    : model.w_out.dot(x);
    }
    return result;
}

EnsembleSummary summarize(std::vector<RunResult> runs) {
    EnsembleSummary s;
    s.runs = std::move(runs);
    double sum = 0.0, sum_all = 0.0;
    long n_ok = 0, n_div = 0;
    for (const auto& r : s.runs) {
        const double capped = std::isfinite(r.nmse) ? std::min(r.nmse, 1e6) : 1e6;
        sum_all += capped;
        if (capped > 1.0) {
            ++n_div;
        } else {
            sum += capped;
            ++n_ok;
        }
    }
    const long n = static_cast<long>(s.runs.size());
    s.mean_nmse = n_ok > 0 ? sum / static_cast<double>(n_ok)
                           : std::numeric_limits<double>::quiet_NaN();
    s.mean_nmse_all = n > 0 ? sum_all / static_cast<double>(n) : 0.0;
    if (n_ok > 1) {
        double ss = 0.0;
        for (const auto& r : s.runs)
            if (std::isfinite(r.nmse) && r.nmse <= 1.0)
                ss += (r.nmse - s.mean_nmse) * (r.nmse - s.mean_nmse);
        s.stdev_nmse = std::sqrt(ss / static_cast<double>(n_ok - 1));
    }
    s.divergence_pct = n > 0 ? 100.0 * static_cast<double>(n_div) /
                                   static_cast<double>(n)
                             : 0.0;
    return s;
}

MgTask make_mg_task(const EnsembleConfig& config, std::uint64_t sequence_seed) {
    MGParams params;  // paper Mackey-Glass parameterization is the default
    TimeSeries series = gen_mackey_glass(params, config.train_len + config.horizon,
                                         MGHistory{}, sequence_seed);
    // center on the training-window mean before injection
    const double mean = series.values.head(config.train_len).mean();
    series.values.array() -= mean;
    MgTask task;
    task.train = series.segment(0, config.train_len);
    task.target = series.segment(config.train_len, config.horizon);
    task.removed_mean = mean;
    return task;
}

RunResult run_prediction(const Reservoir& res, const MgTask& task,
                         const TrainOptions& opts,
                         const std::vector<long>* columns) {
    constexpr std::uint64_t kDriveTag = 0x6E6F697365ULL;  // "noise"
    const StateMatrix states =
        drive(res, task.train, nullptr, opts.washout, opts.train_noise,
              mix64(res.seed ^ kDriveTag));
    return run_prediction_from_states(res, task, states, opts, columns);
}

RunResult run_prediction_from_states(const Reservoir& res, const MgTask& task,
                                     const StateMatrix& states,
                                     const TrainOptions& opts,
                                     const std::vector<long>* columns) {
    // One-step-ahead readout: the state produced by input sample i is taught
    // to emit sample i+1; the final state is held out for continuation.
    const long rows = states.X.rows() - 1;
    const Eigen::VectorXd teacher = task.train.values.tail(rows);
    Eigen::MatrixXd features =
        columns ? select_columns(states.X.topRows(rows), *columns)
                : states.X.topRows(rows);
    if (opts.entry_noise > 0.0) {
        // i.i.d. jitter on every training-matrix entry: the per-feature noise
        // regularizer for output-feedback readouts. Duplicated columns draw
        // independent jitter, so multiply-selected nodes are regularized less
        // -- the over-fitting path opened by overlapping readout windows.
        constexpr std::uint64_t kTrainTag = 0x747261696EULL;  // "train"
        Rng rng(mix64(res.seed ^ kTrainTag));
        for (long c = 0; c < features.cols(); ++c)
            for (long r = 0; r < features.rows(); ++r)
                features(r, c) += opts.entry_noise * rng.uniform(-1.0, 1.0);
    }
    const ReadoutModel model = train_readout(features, teacher, opts.svd_cutoff);
    const double y_first =
        columns ? model.w_out.dot(select_entries(states.final_state, *columns))
                : model.w_out.dot(states.final_state);
    constexpr std::uint64_t kLoopTag = 0x6C6F6F70ULL;  // "loop"
    const ClosedLoopResult pred = predict_closed_loop(
        res, model, states.final_state, y_first, opts.horizon, columns,
        opts.loop_noise, mix64(res.seed ^ kLoopTag));
    RunResult r;
    if (pred.divergent || pred.output.size() != opts.horizon) {
        r.nmse = 1e6;
        r.divergent = true;
        return r;
    }
    r.nmse = nmse(pred.output, task.target);
    if (!std::isfinite(r.nmse) || r.nmse > 1e6) {
        r.nmse = 1e6;
        r.divergent = true;
    }
    return r;
}

EnsembleSummary ensemble_benchmark(const EnsembleConfig& config, long workers) {
    const auto seeds = seed_schedule(config.base_seed, config.n_networks,
                                     config.n_sequences);
    std::vector<RunResult> runs(seeds.size());
    parallel_for(static_cast<long>(seeds.size()), workers, [&](long k) {
        const auto& pair = seeds[static_cast<std::size_t>(k)];
        const Reservoir res = build_reservoir(config.m, config.mu, config.alpha,
                                              config.b, pair.network_seed);
        const MgTask task = make_mg_task(config, pair.sequence_seed);
        RunResult r = run_prediction(res, task, TrainOptions::from(config));
        r.network_id = pair.network_id;
        r.sequence_id = pair.sequence_id;
        runs[static_cast<std::size_t>(k)] = r;
    });
    return summarize(std::move(runs));
}

std::vector<SeedPair> seed_schedule(std::uint64_t base_seed, long n_networks,
                                    long n_sequences) {
    if (n_networks < 1 || n_sequences < 1)
        throw ParameterError("seed_schedule: counts must be >= 1");
    // Counter-mode hashing: seed(role, index) = mix64(mix64(base ^ ROLE) + index).
    // ROLE constants below; mix64 is a single SplitMix64 round.
    constexpr std::uint64_t kNetworkRole = 0x6E65742D726F6C65ULL;   // "net-role"
    constexpr std::uint64_t kSequenceRole = 0x7365712D726F6C65ULL;  // "seq-role"
    std::vector<SeedPair> out;
    out.reserve(static_cast<std::size_t>(n_networks * n_sequences));
    for (long i = 0; i < n_networks; ++i) {
        const std::uint64_t net_seed =
            mix64(mix64(base_seed ^ kNetworkRole) + static_cast<std::uint64_t>(i));
        for (long j = 0; j < n_sequences; ++j) {
            const std::uint64_t seq_seed = mix64(mix64(base_seed ^ kSequenceRole) +
                                                 static_cast<std::uint64_t>(j));
            out.push_back({i, j, net_seed, seq_seed});
        }
    }
    return out;
}

} // namespace takres
