#pragma once

#include "takres/seeds.hpp"
#include "takres/time_series.hpp"

#include <cstdint>
#include <vector>

namespace takres {

/// Random recurrent network: fixed random weights, trained linear readout.
/// W has spectral radius 1 after construction; mu scales it at run time.
struct Reservoir {
    long m = 0;
    Eigen::MatrixXd W;       // m x m, uniform [-1,1] then spectral-radius normalized
    Eigen::VectorXd W_in;    // m, uniform [-1,1]
    Eigen::VectorXd W_off;   // m, uniform [-1,1]
    double mu = 1.1;
    double alpha = 0.8;
    double b = 0.2;
    std::uint64_t seed = 0;
};

struct StateMatrix {
    Eigen::MatrixXd X;             // T x m node responses (post-washout)
    Eigen::VectorXd final_state;   // last state, for closed-loop continuation
    long washout = 0;
};

/// Trained output weights plus the feature layout they were trained against.
struct ReadoutModel {
    Eigen::VectorXd w_out;
    double train_nmse = 0.0;
    bool rank_deficient = false;
};

struct ClosedLoopResult {
    TimeSeries output;
    bool divergent = false;
};

Reservoir build_reservoir(long m, double mu, double alpha, double b,
                          std::uint64_t seed);

/// Teacher-forced state evolution x_{n+1} = tanh(mu W x_n + alpha W_in y_{n+1}
/// + W_off b). Row i of the result is the state produced by input sample
/// washout + i; the final state is retained regardless of washout.
/// `state_noise` adds seeded uniform noise in [-a, a] to every node after
/// each update; used as regularization when sampling training states so the
/// trained loop stays stable in generation mode.
StateMatrix drive(const Reservoir& res, const TimeSeries& input,
                  const Eigen::VectorXd* x0 = nullptr, long washout = 0,
                  double state_noise = 0.0, std::uint64_t noise_seed = 0);

/// SVD pseudo-inverse least squares; cutoff is relative to the largest
/// singular value.
ReadoutModel train_readout(const Eigen::MatrixXd& features,
                           const Eigen::VectorXd& teacher,
                           double svd_cutoff = 1e-12);

/// Free-running prediction: previous output fed back as the next input.
/// `y_start` is the model's one-step prediction from x_start (normally the
/// readout of the final teacher-forced state); it is emitted as the first
/// sample and fed back to produce the rest. `columns` restricts the readout
/// to a node subset (with multiplicity); null means all nodes.
ClosedLoopResult predict_closed_loop(const Reservoir& res, const ReadoutModel& model,
                                     const Eigen::VectorXd& x_start, double y_start,
                                     long horizon,
                                     const std::vector<long>* columns = nullptr,
                                     double state_noise = 0.0,
                                     std::uint64_t noise_seed = 0);

enum class NmseNorm { Variance, Stdev };

double nmse(const TimeSeries& prediction, const TimeSeries& target,
            NmseNorm norm = NmseNorm::Variance);
double nmse(const Eigen::VectorXd& prediction, const Eigen::VectorXd& target,
            NmseNorm norm = NmseNorm::Variance);

/// Select feature columns (with multiplicity) from a state matrix.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X,
                               const std::vector<long>& columns);
Eigen::VectorXd select_entries(const Eigen::VectorXd& x,
                               const std::vector<long>& columns);

struct EnsembleConfig {
    long m = 1000;
    double mu = 1.1;
    double alpha = 0.8;
    double b = 0.2;
    long train_len = 3000;
    long washout = 1400;
    long horizon = 300;
    double train_noise = 0.016;  // state noise while driving with the teacher
    double entry_noise = 0.015;  // i.i.d. jitter per training-matrix entry
    double loop_noise = 0.005;   // state noise during the free run
    double svd_cutoff = 1e-12;
    long n_networks = 20;
    long n_sequences = 20;
    std::uint64_t base_seed = 1;
};

struct RunResult {
    long network_id = 0;
    long sequence_id = 0;
    double nmse = 0.0;
    bool divergent = false;
};

struct EnsembleSummary {
    std::vector<RunResult> runs;
    double mean_nmse = 0.0;      // over non-divergent runs (NMSE <= 1)
    double mean_nmse_all = 0.0;  // over all runs, each capped at 1e6
    double stdev_nmse = 0.0;
    double divergence_pct = 0.0;  // percentage of runs with NMSE > 1
};

EnsembleSummary summarize(std::vector<RunResult> runs);

/// One Mackey-Glass prediction task: centered training inputs and the
/// horizon of true continuation samples.
struct MgTask {
    TimeSeries train;
    TimeSeries target;
    double removed_mean = 0.0;
};

MgTask make_mg_task(const EnsembleConfig& config, std::uint64_t sequence_seed);

struct TrainOptions {
    long washout = 1400;
    long horizon = 300;
    double train_noise = 0.016;
    double entry_noise = 0.015;
    double loop_noise = 0.005;
    double svd_cutoff = 1e-12;

    static TrainOptions from(const EnsembleConfig& c) {
        return {c.washout,     c.horizon,    c.train_noise,
                c.entry_noise, c.loop_noise, c.svd_cutoff};
    }
};

/// Drive, train the one-step-ahead readout (optionally on a column subset),
/// free-run, score against the task's continuation.
RunResult run_prediction(const Reservoir& res, const MgTask& task,
                         const TrainOptions& opts,
                         const std::vector<long>* columns = nullptr);

/// Same, but reusing already-driven states (scans share one drive across
/// several readout filters).
RunResult run_prediction_from_states(const Reservoir& res, const MgTask& task,
                                     const StateMatrix& states,
                                     const TrainOptions& opts,
                                     const std::vector<long>* columns = nullptr);

/// Full train/predict pipeline per (network, sequence) pair on the
/// Mackey-Glass task.
EnsembleSummary ensemble_benchmark(const EnsembleConfig& config, long workers = 0);

} // namespace takres
