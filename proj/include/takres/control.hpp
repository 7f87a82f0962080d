#pragma once

#include "takres/hybrid.hpp"
#include "takres/signals.hpp"

#include <vector>

namespace takres {

/// Spike times (sample indices) and the derived inter-spike intervals.
struct SpikeTrain {
    std::vector<long> spike_indices;  // strictly increasing
    std::vector<long> isi;            // isi[k] = index[k+1] - index[k]
};

/// Upward threshold crossings separated by at least `refractory` samples.
/// No spikes is a valid (empty) result.
SpikeTrain detect_spikes(const TimeSeries& v, double v_threshold,
                         long refractory);

/// Least-squares line I_{n+1} = a I_n + c over the first `fit_window` ISIs
/// (all of them if fewer); fixed point I* = c / (1 - a).
struct ReturnMapFit {
    double fixed_point = 0.0;
    double slope = 0.0;  // a
};

/// Return-map slope a is 1 within tolerance: the line has no fixed point.
struct NoFixedPointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ReturnMapFit fit_return_map(const SpikeTrain& train, long fit_window);

enum class PredictorKind { Oracle, Classic, Hybrid };

/// Voltage predictor used as the controller's sensor. Oracle feeds the true
/// voltage back (controller sanity baseline); Classic is the plain random
/// recurrent network; Hybrid adds the delayed-readout tap.
struct PredictorSpec {
    PredictorKind kind = PredictorKind::Oracle;
    long m = 12;
    double mu = 1.1;
    double alpha = 0.8;
    double b = 0.2;
    long tau_T = -166;  // Hybrid tap; 0 = pick the ACF first minimum
    long washout = 2000;
    double drive_noise = 0.002;  // state noise while driving with the teacher
    double entry_noise = 0.002;  // i.i.d. jitter per training-matrix entry
    double svd_cutoff = 1e-12;
    std::uint64_t seed = 1;
};

/// Demand-pacing controller driven by the predicted voltage: a stimulation
/// pulse is issued when the elapsed time since the last sensed spike (or
/// pulse) exceeds target_isi. Before the controlled phase, the predictor is
/// validated on the uncontrolled observation window (the same data that
/// feeds the return-map fit): it is anchored on measured voltage and its
/// open-loop continuation is scored; pacing stays disabled when that error
/// exceeds gate_threshold, so an unreliable sensor never drives stimulation.
struct ControllerSpec {
    double v_threshold = 0.6;
    long refractory = 0;          // 0 = half of target_isi
    double target_isi = 0.0;      // samples; 0 = fitted return-map fixed point
    double pulse_amplitude = 0.3; // added drive during a pulse
    long pulse_width = 10;        // samples
    long fit_window = 50;         // ISIs used for the return-map fit
    long resync_interval = 1000;  // cycle length in samples
    long sync_len = 200;          // teacher-forced samples per cycle
    double gate_threshold = 1.0;  // max validation tracking error for pacing
    long validation_segments = 25;
    long validation_anchor = 400;   // teacher-forced samples per segment
    long validation_horizon = 800;  // scored open-loop samples per segment
    // post-event blanking: sensed crossings this soon after the last counted
    // event are re-detections of the same beat and do not re-arm the timer
    long blanking = 650;
    bool free_run = false;        // never re-synchronize after start-up
};

struct ControlRunReport {
    SpikeTrain controlled;
    double uncontrolled_mean_isi = 0.0;
    double controlled_mean_isi = 0.0;
    double normalized_mean_isi = 0.0;  // controlled mean / uncontrolled mean
    double isi_cv = 0.0;               // over the last half of the run
    long nodes = 0;
    bool stabilized = false;  // isi_cv < 0.05 with enough spikes
    bool predictor_divergent = false;
    double fitted_fixed_point = 0.0;
    double fitted_slope = 0.0;
    double target_isi = 0.0;   // the value actually paced against
    double validation_error = 0.0;  // anchored open-loop error, gate input
    bool gate_passed = false;
    double mean_gate_error = 0.0;   // in-run cycle tracking error (telemetry)
    long n_pulses = 0;
};

/// Train the predictor on the first train_len voltage samples, fit the
/// return map on an uncontrolled continuation of run_len samples, then run
/// the controlled phase over the same noise realization. With
/// pulse_amplitude = 0 the controlled voltage reproduces the uncontrolled
/// run exactly.
ControlRunReport run_controlled(const FHNParams& fhn, const PredictorSpec& pred,
                                const ControllerSpec& ctrl, long train_len,
                                long run_len, std::uint64_t seed);

struct NodeSweepRow {
    long nodes = 0;
    PredictorKind kind = PredictorKind::Classic;
    double normalized_mean_isi = 0.0;
    double isi_cv = 0.0;
    bool stabilized = false;
    double validation_error = 0.0;
    bool gate_passed = false;
};

/// Neuron parameters for the control experiments: excitable regime
/// (quiescent without noise, irregular noise-triggered spiking with it).
FHNParams fhn_excitable_preset();

struct NodeSweepConfig {
    FHNParams fhn = fhn_excitable_preset();
    // paced interval below the preset's spontaneous ISI floor (~950 samples)
    // so every beat is stimulus-captured; the fitted fixed point of the
    // noise-triggered map sits near the mean interval, far too long to pace
    ControllerSpec ctrl{.target_isi = 700.0};
    // contractive reservoir: the delayed tap supplies all long memory
    PredictorSpec hybrid_base{.kind = PredictorKind::Hybrid, .mu = 0.1};
    // near-linear, weakly driven reservoir: long recurrent memory, reaching
    // the tap span of the hybrid only once the node count is large enough
    PredictorSpec classic_base{
        .kind = PredictorKind::Classic, .mu = 0.99, .alpha = 0.2};
    std::vector<long> hybrid_nodes = {8, 12, 20, 30};
    std::vector<long> classic_nodes = {12, 30, 60, 120, 200, 340};
    long train_len = 100000;
    long run_len = 1000000;
    std::uint64_t seed = 1;
    long workers = 0;
};

/// Controlled run per (architecture, node count); both sweeps share the
/// neuron, controller, and seed so rows are directly comparable.
std::vector<NodeSweepRow> node_sweep(const NodeSweepConfig& config);

} // namespace takres
