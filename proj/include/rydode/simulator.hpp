#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rydode/hamiltonian.hpp"

namespace rydode {

struct QuantumState {
    Eigen::VectorXcd amplitudes;

    static QuantumState ground(int n_qubits);
    static QuantumState basis(int n_qubits, std::size_t index);

    int n_qubits() const;
    double norm_squared() const { return amplitudes.squaredNorm(); }
};

struct EvolutionConfig {
    double max_step_phase = 0.05;  // rad, bound on ‖H‖·dt
    double dt_max = 0.001;         // µs

    void validate() const;
};

struct NoiseSpec {
    double position_sigma = 0.1;        // µm
    double rabi_relative_sigma = 0.01;  // dimensionless
    double detuning_sigma = 0.5;        // rad/µs
    std::uint64_t seed = 0;

    void validate() const;
    NoiseSpec scaled(double multiplier) const;
};

using StepObserver = std::function<void(double t, const QuantumState& state)>;

// Time-ordered propagator for one HamiltonianSpec.
//
// Time is split at every channel breakpoint. On segments where all channels
// are constant the propagator is exact (eigendecomposition of H, computed once
// at construction). On ramp segments it takes midpoint-exponential steps
// ψ ← exp(−i H(t + dt/2) dt) ψ with ‖H‖·dt ≤ max_step_phase and dt ≤ dt_max; the
// exponential action is summed as a Taylor series to machine precision.
class Propagator {
public:
    explicit Propagator(HamiltonianSpec spec, EvolutionConfig config = {});

    const HamiltonianSpec& spec() const { return spec_; }
    const EvolutionConfig& config() const { return config_; }

    // Evolves state from t_from to t_to (t_from <= t_to). With an observer the
    // constant segments are also walked in steps and the observer sees every
    // step.
    void advance(QuantumState& state, double t_from, double t_to, const StepObserver* observer = nullptr) const;

    QuantumState run(const StepObserver* observer = nullptr) const;

private:
    struct Segment {
        double start = 0.0;
        double end = 0.0;
        bool constant = false;
        int eigen_index = -1;
    };
    struct Eigensystem {
        Eigen::MatrixXd vectors;
        Eigen::VectorXd values;
    };

    void advance_ramp(QuantumState& state, double a, double b, const StepObserver* observer) const;
    void advance_constant(QuantumState& state, const Segment& segment, double a, double b,
                          const StepObserver* observer) const;
    void apply_exponential(Eigen::VectorXcd& psi, const ChannelValues& values, double dt) const;
    void apply_eigen(Eigen::VectorXcd& psi, const Eigensystem& system, double tau) const;
    double step_size(double a, double b) const;

    HamiltonianSpec spec_;
    EvolutionConfig config_;
    std::vector<Segment> segments_;
    std::vector<Eigensystem> eigensystems_;
};

// |Ψ(duration)⟩ starting from |0…0⟩.
QuantumState evolve(const HamiltonianSpec& spec, const EvolutionConfig& config = {});
QuantumState evolve(const HamiltonianSpec& spec, const EvolutionConfig& config, const StepObserver& observer);

// Probability of finding atom i in |r⟩.
std::vector<double> rydberg_probabilities(const QuantumState& state);

// Mean of the per-atom Rydberg probabilities.
double predict(const QuantumState& state);

// 1 when soft >= 0.5.
int hard_label(double soft);

// Multinomial shots. Keys are bitstrings with character i giving atom i.
// Throws std::invalid_argument for n_shots < 1.
std::map<std::string, int> sample_shots(const QuantumState& state, int n_shots, std::uint64_t seed);

// Mean per-atom excitation estimated from a shot histogram.
double shot_estimate(const std::map<std::string, int>& counts);

// Gaussian hardware noise: per-coordinate position jitter, relative Ω
// breakpoint jitter (re-clamped to the channel limits) and additive Δ, δ
// breakpoint jitter. Registers that land below the spacing floor are redrawn
// up to kMaxPositionRedraws times; after that std::runtime_error.
inline constexpr int kMaxPositionRedraws = 100;
HamiltonianSpec perturb(const HamiltonianSpec& spec, const NoiseSpec& noise);

}  // namespace rydode
