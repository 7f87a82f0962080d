#include "takres/control.hpp"
#include "takres/embedding.hpp"
#include "takres/parallel.hpp"
#include "takres/rng.hpp"

#include <cmath>
#include <cstdlib>

namespace takres {

namespace {

constexpr std::uint64_t kFhnTrainTag = 0x76747261696EULL;  // "vtrain"
constexpr std::uint64_t kFhnRunTag = 0x7672756EULL;        // "vrun"
constexpr std::uint64_t kDriveTag = 0x6E6F697365ULL;       // "noise"
constexpr std::uint64_t kEntryTag = 0x747261696EULL;       // "train"

// Provisional detection refractory for the uncontrolled fit pass: longer
// than the voltage excursion above threshold (~300 samples in the excitable
// preset) and shorter than any spontaneous interval of interest.
constexpr long kFitRefractory = 200;

double mean_of(const std::vector<long>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (long x : xs) s += static_cast<double>(x);
    return s / static_cast<double>(xs.size());
}

} // namespace

FHNParams fhn_excitable_preset() {
    FHNParams p;
    p.I = 0.05;           // below the oscillation onset: quiescent without noise
    p.noise_sigma = 0.002; // irregular noise-triggered spiking (ISI CV ~ 0.5)
    return p;
}

SpikeTrain detect_spikes(const TimeSeries& v, double v_threshold,
                         long refractory) {
    if (refractory < 0)
        throw ParameterError("detect_spikes: refractory must be >= 0");
    SpikeTrain train;
    for (long i = 1; i < v.size(); ++i) {
        if (v.values[i - 1] < v_threshold && v.values[i] >= v_threshold &&
            (train.spike_indices.empty() ||
             i - train.spike_indices.back() >= refractory))
            train.spike_indices.push_back(i);
    }
    for (std::size_t k = 1; k < train.spike_indices.size(); ++k)
        train.isi.push_back(train.spike_indices[k] - train.spike_indices[k - 1]);
    return train;
}

ReturnMapFit fit_return_map(const SpikeTrain& train, long fit_window) {
    const long n_isi = static_cast<long>(train.isi.size());
    if (n_isi < 10)
        throw ParameterError("fit_return_map: need at least 10 ISIs");
    const long n = std::min(fit_window, n_isi) - 1;  // pairs (I_k, I_{k+1})
    if (n < 2)
        throw ParameterError("fit_return_map: fit_window too small");

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (long k = 0; k < n; ++k) {
        const double x = static_cast<double>(train.isi[static_cast<std::size_t>(k)]);
        const double y =
            static_cast<double>(train.isi[static_cast<std::size_t>(k + 1)]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    ReturnMapFit fit;
    if (std::abs(denom) < 1e-12) {
        // constant ISI sequence: slope 0, fixed point at the constant
        fit.slope = 0.0;
        fit.fixed_point = sy / static_cast<double>(n);
        return fit;
    }
    fit.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.slope * sx) / static_cast<double>(n);
    if (std::abs(1.0 - fit.slope) < 1e-6)
        throw NoFixedPointError("fit_return_map: slope is 1, no fixed point");
    fit.fixed_point = intercept / (1.0 - fit.slope);
    return fit;
}

namespace {

// Live predictor state stepped in lockstep with the neuron during the
// controlled phase. The network always evolves on the sensed (possibly
// predicted) voltage; only the emitted prediction differs per architecture.
struct LivePredictor {
    PredictorKind kind = PredictorKind::Oracle;
    Reservoir res;
    ReadoutModel model;
    long tau = 0;                          // signed Hybrid tap
    long depth = 0;                        // |tau_T| for Hybrid
    std::vector<Eigen::VectorXd> ring;     // depth+1 recent states
    std::size_t head = 0;                  // oldest slot
    Eigen::VectorXd state;
    double signal_mean = 0.0;
    double signal_var = 1.0;
    Eigen::MatrixXd Wmu;
    Eigen::VectorXd offset;

    // Advance one step on (centered) input u; return predicted voltage.
    double step(double u) {
        state = (Wmu * state + res.alpha * u * res.W_in + offset).array().tanh();
        if (kind == PredictorKind::Classic)
            return model.w_out.dot(state) + signal_mean;
        // Hybrid: pair the new state with its depth-delayed partner.
        ring[head] = state;
        head = (head + 1) % ring.size();
        const Eigen::VectorXd& delayed = ring[head];
        const long m = res.m;
        double y = model.w_out.head(m).dot(state) +
                   model.w_out.tail(m).dot(delayed);
        return y + signal_mean;
    }
};

LivePredictor train_predictor(const PredictorSpec& spec,
                              const TimeSeries& v_train) {
    LivePredictor lp;
    lp.kind = spec.kind;
    const double mean = v_train.values.mean();
    lp.signal_mean = mean;
    TimeSeries centered;
    centered.values = v_train.values.array() - mean;
    lp.signal_var = centered.values.array().square().mean();
    if (lp.kind == PredictorKind::Oracle) return lp;

    lp.res = build_reservoir(spec.m, spec.mu, spec.alpha, spec.b, spec.seed);
    lp.Wmu = lp.res.mu * lp.res.W;
    lp.offset = lp.res.W_off * lp.res.b;

    long tau = spec.tau_T;
    if (lp.kind == PredictorKind::Hybrid && tau == 0) {
        const long max_lag = std::min<long>(3000, v_train.size() / 4);
        tau = select_tau0(acf(centered, max_lag));
    }
    lp.tau = tau;
    lp.depth = lp.kind == PredictorKind::Hybrid ? std::labs(tau) : 0;
    const long washout = std::max(spec.washout, lp.depth + 1);
    if (v_train.size() <= washout + 2)
        throw ParameterError("train_predictor: training series too short");

    Eigen::MatrixXd features;
    if (lp.kind == PredictorKind::Classic) {
        StateMatrix st = drive(lp.res, centered, nullptr, washout,
                               spec.drive_noise, mix64(spec.seed ^ kDriveTag));
        features = st.X;
        lp.state = st.final_state;
    } else {
        TrrnnSpec tspec{tau, lp.res};
        AugmentedStateMatrix aug =
            drive_augmented(tspec, centered, washout, spec.drive_noise,
                            mix64(spec.seed ^ kDriveTag));
        features = std::move(aug.X);
        lp.ring.assign(aug.tail_states.begin(), aug.tail_states.end());
        lp.head = 0;  // oldest of the depth+1 most recent states
        lp.state = aug.tail_states.back();
    }
    const long rows = features.rows() - 1;
    const Eigen::VectorXd teacher = centered.values.tail(rows);
    Eigen::MatrixXd F = features.topRows(rows);
    if (spec.entry_noise > 0.0) {
        Rng rng(mix64(spec.seed ^ kEntryTag));
        for (long c = 0; c < F.cols(); ++c)
            for (long r = 0; r < rows; ++r)
                F(r, c) += spec.entry_noise * rng.uniform(-1.0, 1.0);
    }
    lp.model = train_readout(F, teacher, spec.svd_cutoff);
    return lp;
}

// Sensor validation on unstimulated observation data: anchor the predictor
// on measured voltage up to just after a spike onset, free-run it, and score
// the continuation (the rest of the excursion and the recovery) against what
// the neuron actually did. Anchoring at spikes is deliberate: quiescent
// stretches are trivially predictable and would dilute the score, while
// continuing an excursion is exactly what the pacing timer relies on.
// Per-segment errors are capped at 10 so one divergent segment cannot be
// averaged away.
double anchored_validation_error(const LivePredictor& lp,
                                 const Eigen::VectorXd& centered,
                                 const std::vector<long>& spike_indices,
                                 const ControllerSpec& ctrl) {
    const long anchor = ctrl.validation_anchor + lp.depth;
    const long horizon = ctrl.validation_horizon;
    const long onset_lead = 50;  // anchored samples past the onset crossing
    const long n = ctrl.validation_segments;
    if (n < 1 || centered.size() < anchor + horizon + 1) return 1e6;
    const double var = std::max(lp.signal_var, 1e-12);

    double total = 0.0;
    long count = 0;
    for (long t : spike_indices) {
        if (count >= n) break;
        const long start = t + onset_lead - anchor;
        if (start < 0) continue;
        if (start + anchor + horizon >= centered.size()) break;
        TimeSeries seg;
        seg.values = centered.segment(start, anchor);
        const Eigen::VectorXd truth = centered.segment(start + anchor, horizon);
        double err = 10.0;
        if (lp.kind == PredictorKind::Classic) {
            const StateMatrix st = drive(lp.res, seg);
            const double y0 = lp.model.w_out.dot(st.final_state);
            const ClosedLoopResult cl =
                predict_closed_loop(lp.res, lp.model, st.final_state, y0, horizon);
            if (!cl.divergent)
                err = (cl.output.values - truth).squaredNorm() /
                      (static_cast<double>(horizon) * var);
        } else {
            const TrrnnSpec ts{lp.tau, lp.res};
            const AugmentedStateMatrix an = drive_augmented(ts, seg, lp.depth);
            const double y0 = lp.model.w_out.dot(an.X.row(an.X.rows() - 1));
            const ClosedLoopResult cl = trrnn_predict_closed_loop(
                ts, lp.model, an.tail_states, y0, horizon);
            if (!cl.divergent)
                err = (cl.output.values - truth).squaredNorm() /
                      (static_cast<double>(horizon) * var);
        }
        total += std::min(err, 10.0);
        ++count;
    }
    // too few observed spikes to judge the sensor: fail safe, no pacing
    if (count < 3) return 1e6;
    return total / static_cast<double>(count);
}

} // namespace

ControlRunReport run_controlled(const FHNParams& fhn, const PredictorSpec& pred,
                                const ControllerSpec& ctrl, long train_len,
                                long run_len, std::uint64_t seed) {
    if (train_len < 1000 || run_len < 1000)
        throw ParameterError("run_controlled: train_len/run_len too short");
    if (ctrl.pulse_width < 1)
        throw ParameterError("run_controlled: pulse_width must be >= 1");
    if (ctrl.sync_len < 1 || ctrl.sync_len >= ctrl.resync_interval)
        throw ParameterError(
            "run_controlled: need 1 <= sync_len < resync_interval");

    // Phase A: training voltage.
    const FHNTrace train_trace =
        gen_fhn(fhn, train_len, {0.0, 0.0}, mix64(seed ^ kFhnTrainTag));
    FHNState run_start{train_trace.v.values[train_len - 1],
                       train_trace.w.values[train_len - 1]};

    // Phase B: uncontrolled continuation for the return-map fit. The run
    // phase replays this exact noise stream, so pulse_amplitude = 0
    // reproduces these statistics sample for sample.
    TimeSeries v_unc;
    v_unc.values.resize(run_len);
    {
        Rng rng(mix64(seed ^ kFhnRunTag));
        FHNState s = run_start;
        for (long n = 0; n < run_len; ++n) {
            s = fhn_step(fhn, s, 0.0, fhn.noise_sigma > 0.0 ? rng.normal() : 0.0);
            v_unc.values[n] = s.v;
        }
    }
    const SpikeTrain unc =
        detect_spikes(v_unc, ctrl.v_threshold, kFitRefractory);

    ControlRunReport report;
    report.uncontrolled_mean_isi = mean_of(unc.isi);
    if (static_cast<long>(unc.isi.size()) >= 10) {
        const ReturnMapFit fit = fit_return_map(unc, ctrl.fit_window);
        report.fitted_fixed_point = fit.fixed_point;
        report.fitted_slope = fit.slope;
    }
    const double target =
        ctrl.target_isi > 0.0 ? ctrl.target_isi : report.fitted_fixed_point;
    if (target <= 0.0)
        throw ParameterError(
            "run_controlled: no target ISI (no spikes to fit and none given)");
    const long refractory =
        ctrl.refractory > 0 ? ctrl.refractory : std::lround(0.5 * target);
    report.target_isi = target;

    // Phase C: predictor training, then sensor validation on the same
    // uncontrolled observation window that produced the return-map fit.
    LivePredictor lp = train_predictor(pred, train_trace.v);
    report.nodes = pred.kind == PredictorKind::Oracle ? 0 : pred.m;
    const bool oracle = pred.kind == PredictorKind::Oracle;
    if (!oracle) {
        Eigen::VectorXd centered = v_unc.values.array() - lp.signal_mean;
        report.validation_error =
            anchored_validation_error(lp, centered, unc.spike_indices, ctrl);
    }
    report.gate_passed =
        oracle || report.validation_error < ctrl.gate_threshold;

    // Phase D: controlled run.
    TimeSeries v_ctl;
    v_ctl.values.resize(run_len);
    {
        Rng rng(mix64(seed ^ kFhnRunTag));  // same stream as phase B
        FHNState s = run_start;
        double prev_sensed = run_start.v;
        double sensed = run_start.v;
        long last_event = -refractory;      // pacing timer anchor
        long last_detect = -refractory;     // sensed-spike refractory anchor
        long pulse_left = 0;
        const bool pacing_enabled = report.gate_passed;
        double cycle_sq = 0.0;
        long cycle_cnt = 0;
        double gate_sum = 0.0;
        long gate_cycles = 0;

        for (long n = 0; n < run_len; ++n) {
            // demand pacing: stimulate when the sensed quiet spell exceeds
            // the target; the pulse itself re-arms the timer (assumed capture)
            if (pacing_enabled && pulse_left == 0 &&
                n - last_event > static_cast<long>(target)) {
                pulse_left = ctrl.pulse_width;
                last_event = n;
                ++report.n_pulses;
            }
            double drive_extra = 0.0;
            if (pulse_left > 0) {
                drive_extra = ctrl.pulse_amplitude;
                --pulse_left;
            }
            s = fhn_step(fhn, s, drive_extra,
                         fhn.noise_sigma > 0.0 ? rng.normal() : 0.0);
            v_ctl.values[n] = s.v;

            // sensor: predicted voltage, re-anchored to the measurement for
            // the first sync_len samples of each resync cycle
            const long c = n % ctrl.resync_interval;
            const bool syncing =
                oracle || (ctrl.free_run ? n < ctrl.sync_len : c < ctrl.sync_len);
            if (oracle) {
                sensed = s.v;
            } else {
                double u = prev_sensed - lp.signal_mean;
                if (u > 2.0) u = 2.0;
                if (u < -2.0) u = -2.0;
                double vhat = lp.step(u);
                if (!std::isfinite(vhat) || std::abs(vhat) > 1e3) {
                    report.predictor_divergent = true;
                    vhat = lp.signal_mean;
                }
                if (!syncing) {
                    const double d = vhat - s.v;
                    cycle_sq += d * d;
                    ++cycle_cnt;
                }
                sensed = syncing ? s.v : vhat;
                if (c == ctrl.resync_interval - 1 && cycle_cnt > 0) {
                    gate_sum += cycle_sq / (static_cast<double>(cycle_cnt) *
                                            std::max(lp.signal_var, 1e-12));
                    ++gate_cycles;
                    cycle_sq = 0.0;
                    cycle_cnt = 0;
                }
            }
            if (prev_sensed < ctrl.v_threshold && sensed >= ctrl.v_threshold &&
                n - last_detect >= refractory) {
                last_detect = n;
                // blanking: a crossing right after a counted event is the
                // same beat (e.g. the echo of a pace) and must not re-arm
                // the demand timer
                if (n - last_event > ctrl.blanking) last_event = n;
            }
            prev_sensed = sensed;
        }
        if (gate_cycles > 0)
            report.mean_gate_error = gate_sum / static_cast<double>(gate_cycles);
    }

    report.controlled = detect_spikes(v_ctl, ctrl.v_threshold, refractory);
    report.controlled_mean_isi = mean_of(report.controlled.isi);
    if (report.uncontrolled_mean_isi > 0.0)
        report.normalized_mean_isi =
            report.controlled_mean_isi / report.uncontrolled_mean_isi;

    // stabilization: ISI coefficient of variation over the last half
    std::vector<double> tail_isi;
    for (std::size_t k = 1; k < report.controlled.spike_indices.size(); ++k)
        if (report.controlled.spike_indices[k] >= run_len / 2)
            tail_isi.push_back(static_cast<double>(
                report.controlled.spike_indices[k] -
                report.controlled.spike_indices[k - 1]));
    if (tail_isi.size() >= 2) {
        double m = 0.0, sd = 0.0;
        for (double x : tail_isi) m += x;
        m /= static_cast<double>(tail_isi.size());
        for (double x : tail_isi) sd += (x - m) * (x - m);
        sd = std::sqrt(sd / static_cast<double>(tail_isi.size() - 1));
        report.isi_cv = m > 0.0 ? sd / m : 0.0;
        report.stabilized = !report.predictor_divergent &&
                            tail_isi.size() >= 10 && report.isi_cv < 0.05;
    } else {
        report.isi_cv = 0.0;
        report.stabilized = false;
    }
    return report;
}

std::vector<NodeSweepRow> node_sweep(const NodeSweepConfig& config) {
    struct Job {
        PredictorSpec spec;
    };
    std::vector<Job> jobs;
    for (long m : config.hybrid_nodes) {
        PredictorSpec s = config.hybrid_base;
        s.kind = PredictorKind::Hybrid;
        s.m = m;
        jobs.push_back({s});
    }
    for (long m : config.classic_nodes) {
        PredictorSpec s = config.classic_base;
        s.kind = PredictorKind::Classic;
        s.m = m;
        jobs.push_back({s});
    }
    std::vector<NodeSweepRow> rows(jobs.size());
    parallel_for(static_cast<long>(jobs.size()), config.workers, [&](long i) {
        const Job& job = jobs[static_cast<std::size_t>(i)];
        const ControlRunReport rep =
            run_controlled(config.fhn, job.spec, config.ctrl, config.train_len,
                           config.run_len, config.seed);
        NodeSweepRow& row = rows[static_cast<std::size_t>(i)];
        row.nodes = job.spec.m;
        row.kind = job.spec.kind;
        row.normalized_mean_isi = rep.normalized_mean_isi;
        row.isi_cv = rep.isi_cv;
        row.stabilized = rep.stabilized;
        row.validation_error = rep.validation_error;
        row.gate_passed = rep.gate_passed;
    });
    return rows;
}

} // namespace takres
