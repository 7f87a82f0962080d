#pragma once

#include <cstdint>
#include <vector>

namespace takres {

struct SeedPair {
    long network_id = 0;
    long sequence_id = 0;
    std::uint64_t network_seed = 0;
    std::uint64_t sequence_seed = 0;
};

/// Deterministic, collision-free per-run seed derivation:
/// seed(role, index) = mix64(mix64(base ^ ROLE) + index), with ROLE the ASCII
/// constants "net-role" / "seq-role" and mix64 a single SplitMix64 round.
std::vector<SeedPair> seed_schedule(std::uint64_t base_seed, long n_networks,
                                    long n_sequences);

} // namespace takres
