#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rydode/grid.hpp"
#include "rydode/pulse.hpp"

namespace rydode {

// Basis convention shared by every module: basis index x encodes one
// occupation per atom, bit i of x is atom i (atom 0 is the least significant
// bit), bit value 0 = ground |g⟩ and 1 = Rydberg |r⟩.
using HermitianOperator = Eigen::MatrixXcd;

struct ChannelValues {
    double omega = 0.0;
    double delta = 0.0;
    double local_delta = 0.0;
};

// Everything needed to evaluate
//
//   H(t) = Ω(t)/2 Σ_i (|g⟩⟨r|_i + |r⟩⟨g|_i) − Δ(t) Σ_i n_i − δ(t) Σ_i h_i n_i
//          + Σ_{i<j} V_ij n_i n_j
//
// at any t in [0, duration]. Energies in rad/µs, ħ = 1. Immutable after
// assembly.
struct HamiltonianSpec {
    AtomGrid grid;
    PulseSchedule omega;
    PulseSchedule delta;
    PulseSchedule local_delta;
    double phi = 0.0;
    std::vector<double> h;
    double duration = 0.0;
    InteractionMatrix interactions;

    // Per-basis-state diagonal pieces, length 2^N.
    std::vector<double> basis_interaction;  // Σ_{i<j} V_ij b_i b_j
    std::vector<double> basis_occupation;   // Σ_i b_i
    std::vector<double> basis_coupling;     // Σ_i h_i b_i

    int n_atoms() const { return static_cast<int>(grid.n_atoms()); }
    std::size_t dimension() const { return basis_interaction.size(); }

    ChannelValues channels_at(double t) const;

    // Diagonal of H at the given channel values.
    void diagonal(const ChannelValues& values, std::vector<double>& out) const;

    // Cheap upper bound on the spectral norm: N|Ω|/2 + max_x |diag_x|.
    double norm_bound(const ChannelValues& values) const;

    // Sorted, deduplicated union of all channel breakpoint times.
    std::vector<double> breakpoint_times() const;
};

// Largest register the dense simulator accepts.
inline constexpr int kMaxAtoms = 12;

// Validates and precomputes. Throws std::invalid_argument on mismatched
// schedule durations, |h| != n_atoms, h outside [0, 1], a duration above
// kMaxDurationUs, or more than kMaxAtoms atoms.
HamiltonianSpec assemble(AtomGrid grid, PulseSchedule omega, PulseSchedule delta, PulseSchedule local_delta,
                         std::vector<double> h);

// Recomputes the cached interaction data after the grid positions changed.
void refresh_interactions(HamiltonianSpec& spec);

// Dense H(t). Throws std::out_of_range outside [0, duration].
HermitianOperator evaluate(const HamiltonianSpec& spec, double t);

// Dense operator for explicit channel values.
HermitianOperator dense_operator(const HamiltonianSpec& spec, const ChannelValues& values);

}  // namespace rydode
