#include "takres/control.hpp"
#include "takres/signals.hpp"

#include <doctest.h>

#include <cmath>

using namespace takres;

TEST_CASE("MGParams history length") {
    MGParams p;
    CHECK(p.history_len() == 170);
    p.tau_m = 17.05;
    CHECK_THROWS_AS(p.history_len(), ParameterError);
    p.tau_m = 17.0;
    p.delta = 0.0;
    CHECK_THROWS_AS(p.history_len(), ParameterError);
}

TEST_CASE("Mackey-Glass nontrivial fixed point is stationary") {
    // theta*y/(1+y^nu) = psi*y has the nontrivial solution
    // y* = (theta/psi - 1)^(1/nu) = 1 for the default parameterization
    MGParams p;
    const TimeSeries ts =
        gen_mackey_glass(p, 200, MGHistory{.constant = 1.0}, 0, /*transient=*/0);
    for (long i = 0; i < ts.size(); ++i)
        CHECK(ts[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Mackey-Glass determinism and attractor range") {
    MGParams p;
    const TimeSeries a = gen_mackey_glass(p, 2000, MGHistory{}, 7);
    const TimeSeries b = gen_mackey_glass(p, 2000, MGHistory{}, 7);
    const TimeSeries c = gen_mackey_glass(p, 2000, MGHistory{}, 8);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    CHECK(a.dt == doctest::Approx(1.0));  // delta * subsample
    CHECK(a.values.minCoeff() > 0.1);
    CHECK(a.values.maxCoeff() < 1.5);
    // oscillatory, not settling to the fixed point
    CHECK(a.values.maxCoeff() - a.values.minCoeff() > 0.5);
}

TEST_CASE("Mackey-Glass rejects bad arguments") {
    MGParams p;
    CHECK_THROWS_AS(gen_mackey_glass(p, 0, MGHistory{}, 1), ParameterError);
    p.subsample = 0;
    CHECK_THROWS_AS(gen_mackey_glass(p, 10, MGHistory{}, 1), ParameterError);
}

TEST_CASE("fhn_step matches the Euler-Maruyama update by hand") {
    FHNParams p;
    FHNState s{0.3, 0.1};
    const double noise = 0.7;
    const FHNState out = fhn_step(p, s, 0.02, noise);
    const double drive = p.I + 0.02;
    const double dv =
        (p.dt / p.epsilon) * (s.v * (s.v - p.g) * (1.0 - s.v) - s.w + drive) +
        (1.0 / p.epsilon) * p.noise_sigma * std::sqrt(p.dt) * noise;
    const double dw = p.dt * (s.v - p.D * s.w - p.H);
    CHECK(out.v == doctest::Approx(s.v + dv).epsilon(1e-15));
    CHECK(out.w == doctest::Approx(s.w + dw).epsilon(1e-15));
}

TEST_CASE("noise-free tonic neuron fires with a constant period") {
    FHNParams p;  // tonic default drive
    p.noise_sigma = 0.0;
    const FHNTrace trace = gen_fhn(p, 50000, {0.0, 0.0}, 1);
    const SpikeTrain train = detect_spikes(trace.v, 0.6, 200);
    REQUIRE(train.isi.size() >= 20);
    // discard the start-up transient, then the ISI must be constant up to
    // one-sample discretization jitter
    long lo = train.isi[5], hi = train.isi[5];
    for (std::size_t k = 5; k < train.isi.size(); ++k) {
        lo = std::min(lo, train.isi[k]);
        hi = std::max(hi, train.isi[k]);
    }
    CHECK(hi - lo <= 1);
}

TEST_CASE("noise-free excitable preset stays quiescent") {
    FHNParams p = fhn_excitable_preset();
    p.noise_sigma = 0.0;
    const FHNTrace trace = gen_fhn(p, 50000, {0.0, 0.0}, 1);
    const SpikeTrain train = detect_spikes(trace.v, 0.6, 200);
    // at most the single start-up excursion; no sustained firing
    CHECK(train.spike_indices.size() <= 1);
}

TEST_CASE("stochastic neuron generation is seed-deterministic") {
    const FHNParams p = fhn_excitable_preset();
    const FHNTrace a = gen_fhn(p, 5000, {0.0, 0.0}, 42);
    const FHNTrace b = gen_fhn(p, 5000, {0.0, 0.0}, 42);
    const FHNTrace c = gen_fhn(p, 5000, {0.0, 0.0}, 43);
    CHECK(a.v.values == b.v.values);
    CHECK(a.w.values == b.w.values);
    CHECK(a.v.values != c.v.values);
}

TEST_CASE("neuron integration reports divergence") {
    FHNParams p;
    p.dt = 10.0;  // grossly unstable step
    p.noise_sigma = 0.0;
    CHECK_THROWS_AS(gen_fhn(p, 1000, {0.9, 0.0}, 1), GenerationError);
}

TEST_CASE("gen_fhn rejects bad arguments") {
    FHNParams p;
    CHECK_THROWS_AS(gen_fhn(p, 0, {0.0, 0.0}, 1), ParameterError);
    p.epsilon = 0.0;
    CHECK_THROWS_AS(gen_fhn(p, 10, {0.0, 0.0}, 1), ParameterError);
}
