#pragma once

#include "takres/time_series.hpp"

#include <optional>
#include <vector>

namespace takres {

/// Discrete-time Mackey-Glass map parameters.
struct MGParams {
    double theta = 0.2;      // feedback gain
    double nu = 10.0;        // nonlinearity exponent
    double psi = 0.1;        // decay rate
    double tau_m = 17.0;     // delay in model time
    double delta = 0.1;      // integration step
    long subsample = 10;     // decimation factor; emitted dt = delta * subsample

    /// History buffer length tau_m / delta; throws if not a positive integer.
    long history_len() const;
};

/// Initial history for the Mackey-Glass iteration: either a constant fill or
/// seeded uniform values in [0.1, 1.3] (the attractor range).
struct MGHistory {
    std::optional<double> constant;  // nullopt -> seeded uniform in [0.1, 1.3]
};

TimeSeries gen_mackey_glass(const MGParams& params, long n_out,
                            const MGHistory& history, std::uint64_t seed,
                            long transient = 1000);

/// Stochastic FitzHugh-Nagumo neuron parameters (Euler-Maruyama integration).
struct FHNParams {
    double epsilon = 0.005;   // timescale separation
    double g = 0.5;           // cubic parameter
    double D = 1.0;           // recovery damping
    double H = 0.15;          // recovery offset
    double I = 0.3;           // tonic drive
    double noise_sigma = 0.02;
    double dt = 0.001;
    bool noise_scaled_by_eps = true;  // noise enters the eps-divided v-equation
    double divergence_bound = 1e3;
};

struct FHNState {
    double v = 0.0;
    double w = 0.0;
};

struct FHNTrace {
    TimeSeries v;
    TimeSeries w;
};

FHNTrace gen_fhn(const FHNParams& params, long n_steps, FHNState initial,
                 std::uint64_t seed);

/// Single-step FHN integrator, exposed so the control loop can interleave
/// stimulation with the integration. `noise` is a standard normal draw.
FHNState fhn_step(const FHNParams& params, FHNState s, double drive_extra,
                  double noise);

} // namespace takres
