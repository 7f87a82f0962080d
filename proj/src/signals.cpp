#include "takres/signals.hpp"
#include "takres/rng.hpp"

#include <cmath>
#include <deque>
#include <string>

namespace takres {

long MGParams::history_len() const {
    if (delta <= 0.0) throw ParameterError("MGParams: delta must be > 0");
    const double ratio = tau_m / delta;
    const long n = static_cast<long>(std::llround(ratio));
    if (n <= 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9)
        throw ParameterError("MGParams: tau_m/delta must be a positive integer, got " +
                             std::to_string(ratio));
    return n;
}

TimeSeries gen_mackey_glass(const MGParams& params, long n_out,
                            const MGHistory& history, std::uint64_t seed,
                            long transient) {
    if (n_out < 1) throw ParameterError("gen_mackey_glass: n_out must be >= 1");
    if (params.subsample < 1) throw ParameterError("gen_mackey_glass: subsample must be >= 1");
    const long lag = params.history_len();

    // ring buffer holding the last lag+1 iterates, oldest first
    std::vector<double> buf(static_cast<std::size_t>(lag) + 1);
    if (history.constant) {
        for (auto& v : buf) v = *history.constant;
    } else {
        Rng rng(seed);
        for (auto& v : buf) v = rng.uniform(0.1, 1.3);
    }
    std::size_t head = 0;  // index of y_{n-lag}

    TimeSeries out;
    out.values.resize(n_out);
    out.dt = params.delta * static_cast<double>(params.subsample);

    const long total = (transient + n_out) * params.subsample;
    long emitted = 0;
    double y = buf[(head + static_cast<std::size_t>(lag)) % buf.size()];
    for (long step = 1; step <= total; ++step) {
        const double y_del = buf[head];
        const double y_next =
            y + params.delta * (params.theta * y_del / (1.0 + std::pow(y_del, params.nu)) -
                                params.psi * y);
        if (!std::isfinite(y_next))
            throw GenerationError("gen_mackey_glass: non-finite value at step " +
                                  std::to_string(step));
        buf[head] = y_next;
        head = (head + 1) % buf.size();
        y = y_next;
        if (step % params.subsample == 0) {
            const long deci = step / params.subsample;
            if (deci > transient) out.values[emitted++] = y;
        }
    }
    return out;
}

FHNState fhn_step(const FHNParams& p, FHNState s, double drive_extra, double noise) {
    const double noise_scale = p.noise_scaled_by_eps ? 1.0 / p.epsilon : 1.0;
    const double drive = p.I + drive_extra;
    const double dv = (p.dt / p.epsilon) *
                          (s.v * (s.v - p.g) * (1.0 - s.v) - s.w + drive) +
                      noise_scale * p.noise_sigma * std::sqrt(p.dt) * noise;
    const double dw = p.dt * (s.v - p.D * s.w - p.H);
    return {s.v + dv, s.w + dw};
}

FHNTrace gen_fhn(const FHNParams& params, long n_steps, FHNState initial,
                 std::uint64_t seed) {
    if (n_steps < 1) throw ParameterError("gen_fhn: n_steps must be >= 1");
    if (params.epsilon <= 0.0) throw ParameterError("gen_fhn: epsilon must be > 0");
    if (params.dt <= 0.0) throw ParameterError("gen_fhn: dt must be > 0");
    if (params.noise_sigma < 0.0) throw ParameterError("gen_fhn: noise_sigma must be >= 0");

    Rng rng(seed);
    FHNTrace trace;
    trace.v.values.resize(n_steps);
    trace.w.values.resize(n_steps);
    trace.v.dt = trace.w.dt = params.dt;

    FHNState s = initial;
    for (long n = 0; n < n_steps; ++n) {
        const double noise = params.noise_sigma > 0.0 ? rng.normal() : 0.0;
        s = fhn_step(params, s, 0.0, noise);
        if (!std::isfinite(s.v) || !std::isfinite(s.w) ||
            std::abs(s.v) > params.divergence_bound)
            throw GenerationError("gen_fhn: divergence at step " + std::to_string(n));
        trace.v.values[n] = s.v;
        trace.w.values[n] = s.w;
    }
    return trace;
}

} // namespace takres
