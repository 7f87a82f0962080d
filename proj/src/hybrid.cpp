#include "takres/hybrid.hpp"
#include "takres/parallel.hpp"
#include "takres/rng.hpp"

#include <cmath>
#include <cstdlib>

namespace takres {

namespace {

constexpr std::uint64_t kDriveTag = 0x6E6F697365ULL;  // "noise"
constexpr std::uint64_t kTrainTag = 0x747261696EULL;  // "train"
constexpr std::uint64_t kLoopTag = 0x6C6F6F70ULL;     // "loop"

// Assemble augmented rows from a raw state matrix whose row r corresponds to
// input sample first_input + r: row t = (raw[t + offset], raw[t + offset - depth]).
Eigen::MatrixXd assemble_augmented(const Eigen::MatrixXd& raw, long offset,
                                   long depth, long rows) {
    const long m = raw.cols();
    Eigen::MatrixXd X(rows, 2 * m);
    for (long t = 0; t < rows; ++t) {
        X.block(t, 0, 1, m) = raw.row(t + offset);
        X.block(t, m, 1, m) = raw.row(t + offset - depth);
    }
    return X;
}

} // namespace

AugmentedStateMatrix drive_augmented(const TrrnnSpec& spec, const TimeSeries& input,
                                     long washout, double state_noise,
                                     std::uint64_t noise_seed) {
    const long depth = std::labs(spec.tau_T);
    if (washout < depth)
        throw ParameterError("drive_augmented: washout must cover |tau_T|");
    if (input.size() <= washout)
        throw ParameterError("drive_augmented: input must be longer than washout");

    // keep the raw rows from washout - depth on, so every emitted augmented
    // row has its delayed partner
    const long keep_from = washout - depth;
    const StateMatrix raw = drive(spec.base, input, nullptr, keep_from,
                                  state_noise, noise_seed);
    const long rows = input.size() - washout;

    AugmentedStateMatrix out;
    out.depth = depth;
    out.washout = washout;
    out.X = assemble_augmented(raw.X, depth, depth, rows);
    const long raw_rows = raw.X.rows();
    for (long r = raw_rows - depth - 1; r < raw_rows; ++r)
        out.tail_states.push_back(raw.X.row(r).transpose());
    return out;
}

ClosedLoopResult trrnn_predict_closed_loop(const TrrnnSpec& spec,
                                           const ReadoutModel& model,
                                           const std::vector<Eigen::VectorXd>& history,
                                           double y_start, long horizon,
                                           double state_noise,
                                           std::uint64_t noise_seed) {
    const long depth = std::labs(spec.tau_T);
    if (horizon < 1)
        throw ParameterError("trrnn_predict_closed_loop: horizon must be >= 1");
    if (static_cast<long>(history.size()) != depth + 1)
        throw ParameterError(
            "trrnn_predict_closed_loop: history must hold |tau_T|+1 states");
    const Reservoir& res = spec.base;

    // ring buffer of the depth+1 most recent states, oldest at `head`
    std::vector<Eigen::VectorXd> ring = history;
    std::size_t head = 0;
    Rng noise_rng(noise_seed);

    ClosedLoopResult result;
    result.output.values.resize(horizon);
    double y = y_start;
    const Eigen::MatrixXd Wmu = res.mu * res.W;
    const Eigen::VectorXd offset = res.W_off * res.b;
    Eigen::VectorXd feature(2 * res.m);
    for (long i = 0; i < horizon; ++i) {
        if (!std::isfinite(y)) {
            result.divergent = true;
            result.output.values.conservativeResize(i);
            return result;
        }
        result.output.values[i] = y;
        const Eigen::VectorXd& newest =
            ring[(head + static_cast<std::size_t>(depth)) % ring.size()];
        Eigen::VectorXd x =
            (Wmu * newest + res.alpha * y * res.W_in + offset).array().tanh();
        if (state_noise > 0.0)
            for (long k = 0; k < res.m; ++k)
                x[k] += state_noise * noise_rng.uniform(-1.0, 1.0);
        feature.head(res.m) = x;
        // overwrite the oldest slot with x; after advancing, the slot at
        // `head` holds exactly the |tau_T|-delayed partner of x (x itself
        // when tau_T = 0)
        ring[head] = std::move(x);
        head = (head + 1) % ring.size();
        feature.tail(res.m) = ring[head];
        y = model.w_out.dot(feature);
    }
    return result;
}

namespace {

RunResult trrnn_run_from_features(const TrrnnSpec& spec, const MgTask& task,
                                  const Eigen::MatrixXd& X,
                                  const std::vector<Eigen::VectorXd>& tail_states,
                                  const TrainOptions& opts) {
    const long rows = X.rows() - 1;
    const Eigen::VectorXd teacher = task.train.values.tail(rows);
    Eigen::MatrixXd features = X.topRows(rows);
    if (opts.entry_noise > 0.0) {
        Rng rng(mix64(spec.base.seed ^ kTrainTag));
        for (long c = 0; c < features.cols(); ++c)
            for (long r = 0; r < features.rows(); ++r)
                features(r, c) += opts.entry_noise * rng.uniform(-1.0, 1.0);
    }
    const ReadoutModel model = train_readout(features, teacher, opts.svd_cutoff);
    const double y_first = model.w_out.dot(X.row(rows));
    const ClosedLoopResult pred = trrnn_predict_closed_loop(
        spec, model, tail_states, y_first, opts.horizon, opts.loop_noise,
        mix64(spec.base.seed ^ kLoopTag));
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

} // namespace

RunResult run_trrnn_prediction(const TrrnnSpec& spec, const MgTask& task,
                               const TrainOptions& opts) {
    const AugmentedStateMatrix aug =
        drive_augmented(spec, task.train, opts.washout, opts.train_noise,
                        mix64(spec.base.seed ^ kDriveTag));
    return trrnn_run_from_features(spec, task, aug.X, aug.tail_states, opts);
}

std::vector<DelayScanRow> delay_scan(const DelayScanConfig& config,
                                     const std::vector<long>& tau_values,
                                     EpsilonMode mode) {
    long max_depth = 0;
    for (long t : tau_values) max_depth = std::max(max_depth, std::labs(t));
    if (config.base.washout < max_depth)
        throw ParameterError("delay_scan: washout must cover the largest |tau_T|");

    const auto seeds = seed_schedule(config.base.base_seed, config.base.n_networks,
                                     config.base.n_sequences);
    const long n_pairs = static_cast<long>(seeds.size());
    const long n_tau = static_cast<long>(tau_values.size());

    struct Outcome {
        RunResult run;
        double eps1 = 0.0, eps2 = 0.0;
        bool eps_valid = false;
    };
    std::vector<std::vector<Outcome>> outcomes(
        static_cast<std::size_t>(n_tau),
        std::vector<Outcome>(static_cast<std::size_t>(n_pairs)));

    const TrainOptions opts = TrainOptions::from(config.base);
    parallel_for(n_pairs, config.workers, [&](long k) {
        const auto& sp = seeds[static_cast<std::size_t>(k)];
        const Reservoir res =
            build_reservoir(config.m, config.mu, config.base.alpha, config.base.b,
                            sp.network_seed);
        const MgTask task = make_mg_task(config.base, sp.sequence_seed);
        // one drive per pair: the state evolution does not depend on tau_T
        const StateMatrix raw =
            drive(res, task.train, nullptr, config.base.washout - max_depth,
                  opts.train_noise, mix64(res.seed ^ kDriveTag));
        const long rows = task.train.size() - config.base.washout;
        TimeSeries input_post;
        input_post.values = task.train.values.tail(rows);
        const DelayMatrix embed = delay_embed(input_post, config.takens);
        const long trim =
            (config.takens.M - 1) * std::labs(config.takens.tau0);

        for (long t = 0; t < n_tau; ++t) {
            const long tau = tau_values[static_cast<std::size_t>(t)];
            const long depth = std::labs(tau);
            TrrnnSpec spec{tau, res};
            const Eigen::MatrixXd X =
                assemble_augmented(raw.X, max_depth, depth, rows);
            std::vector<Eigen::VectorXd> tail;
            for (long r = raw.X.rows() - depth - 1; r < raw.X.rows(); ++r)
                tail.push_back(raw.X.row(r).transpose());

            Outcome& out = outcomes[static_cast<std::size_t>(t)]
                                   [static_cast<std::size_t>(k)];
            out.run = trrnn_run_from_features(spec, task, X, tail, opts);
            out.run.network_id = sp.network_id;
            out.run.sequence_id = sp.sequence_id;
            if (rows - trim >= 2) {
                try {
                    const CcaProfile profile =
                        cca_profile(X, input_post.values, config.lag_lo,
                                    config.lag_hi);
                    const EpsilonBounds eb = epsilon_bounds(
                        embed, X.bottomRows(rows - trim), profile, mode);
                    out.eps1 = eb.eps1;
                    out.eps2 = eb.eps2;
                    out.eps_valid = true;
                } catch (const DegenerateInputError&) {
                    out.eps_valid = false;
                }
            }
        }
    });

    std::vector<DelayScanRow> result(static_cast<std::size_t>(n_tau));
    for (long t = 0; t < n_tau; ++t) {
        DelayScanRow& row = result[static_cast<std::size_t>(t)];
        row.tau_T = tau_values[static_cast<std::size_t>(t)];
        std::vector<RunResult> runs;
        double e1 = 0.0, e2 = 0.0;
        long n_eps = 0;
        for (const auto& o : outcomes[static_cast<std::size_t>(t)]) {
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
    return result;
}

} // namespace takres
