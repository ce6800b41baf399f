#include "rydode/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rydode/rng.hpp"

namespace rydode {

namespace {

// Constant segments are diagonalized up to this Hilbert-space size; larger
// registers step through them like ramps.
constexpr std::size_t kEigenMaxDimension = 256;
constexpr int kMaxTaylorTerms = 40;

}  // namespace

QuantumState QuantumState::ground(int n_qubits) { return basis(n_qubits, 0); }

QuantumState QuantumState::basis(int n_qubits, std::size_t index) {
    if (n_qubits < 1 || n_qubits > kMaxAtoms) {
        throw std::invalid_argument("unsupported qubit count " + std::to_string(n_qubits));
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (index >= dim) {
        throw std::invalid_argument("basis index out of range");
    }
    QuantumState s;
    s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    s.amplitudes(static_cast<Eigen::Index>(index)) = 1.0;
    return s;
}

int QuantumState::n_qubits() const {
    int n = 0;
    while ((Eigen::Index{1} << n) < amplitudes.size()) {
        ++n;
    }
    return n;
}

void EvolutionConfig::validate() const {
    if (!(max_step_phase > 0.0) || !(dt_max > 0.0)) {
        throw std::invalid_argument("evolution step limits must be positive");
    }
}

void NoiseSpec::validate() const {
    if (!(position_sigma >= 0.0) || !(rabi_relative_sigma >= 0.0) || !(detuning_sigma >= 0.0)) {
        throw std::invalid_argument("noise sigmas must be non-negative");
    }
}

NoiseSpec NoiseSpec::scaled(double multiplier) const {
    NoiseSpec out = *this;
    out.position_sigma *= multiplier;
    out.rabi_relative_sigma *= multiplier;
    out.detuning_sigma *= multiplier;
    return out;
}

Propagator::Propagator(HamiltonianSpec spec, EvolutionConfig config) : spec_(std::move(spec)), config_(config) {
    config_.validate();
    if (spec_.phi != 0.0) {
        throw std::invalid_argument("propagator supports phi = 0 only");
    }
    const auto times = spec_.breakpoint_times();
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        Segment seg;
        seg.start = times[k];
        seg.end = times[k + 1];
        const ChannelValues a = spec_.channels_at(seg.start);
        const ChannelValues b = spec_.channels_at(seg.end);
        seg.constant = a.omega == b.omega && a.delta == b.delta && a.local_delta == b.local_delta;
        if (seg.constant && spec_.dimension() <= kEigenMaxDimension) {
            const HermitianOperator h = dense_operator(spec_, a);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.real());
            eigensystems_.push_back({solver.eigenvectors(), solver.eigenvalues()});
            seg.eigen_index = static_cast<int>(eigensystems_.size()) - 1;
        }
        segments_.push_back(seg);
    }
}

double Propagator::step_size(double a, double b) const {
    const double bound = std::max(spec_.norm_bound(spec_.channels_at(a)), spec_.norm_bound(spec_.channels_at(b)));
    double dt = config_.dt_max;
    if (bound > 0.0) {
        dt = std::min(dt, config_.max_step_phase / bound);
    }
    return dt;
}

void Propagator::apply_exponential(Eigen::VectorXcd& psi, const ChannelValues& values, double dt) const {
    const std::size_t dim = spec_.dimension();
    const int n = spec_.n_atoms();
    thread_local std::vector<double> diag;
    spec_.diagonal(values, diag);
    const double half_omega = values.omega / 2.0;

    Eigen::VectorXcd term = psi;
    Eigen::VectorXcd next(psi.size());
    for (int k = 1; k <= kMaxTaylorTerms; ++k) {
        // next = H term
        for (std::size_t x = 0; x < dim; ++x) {
            std::complex<double> acc = diag[x] * term[static_cast<Eigen::Index>(x)];
            if (half_omega != 0.0) {
                std::complex<double> flips = 0.0;
                for (int i = 0; i < n; ++i) {
                    flips += term[static_cast<Eigen::Index>(x ^ (std::size_t{1} << i))];
                }
                acc += half_omega * flips;
            }
            next[static_cast<Eigen::Index>(x)] = acc;
        }
        // term = (−i dt / k) H term
        const std::complex<double> factor(0.0, -dt / k);
        term = factor * next;
        psi += term;
        if (term.lpNorm<Eigen::Infinity>() < 1e-18) {
            break;
        }
    }
}

void Propagator::apply_eigen(Eigen::VectorXcd& psi, const Eigensystem& system, double tau) const {
    Eigen::VectorXcd coeff = system.vectors.transpose() * psi;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) {
        coeff[k] *= std::polar(1.0, -system.values[k] * tau);
    }
    psi = system.vectors * coeff;
}

void Propagator::advance_ramp(QuantumState& state, double a, double b, const StepObserver* observer) const {
    const double length = b - a;
    const int steps = std::max(1, static_cast<int>(std::ceil(length / step_size(a, b) - 1e-9)));
    const double dt = length / steps;
    for (int s = 0; s < steps; ++s) {
        const double t0 = a + s * dt;
        apply_exponential(state.amplitudes, spec_.channels_at(t0 + dt / 2.0), dt);
        if (observer != nullptr) {
            (*observer)(t0 + dt, state);
        }
    }
}

void Propagator::advance_constant(QuantumState& state, const Segment& segment, double a, double b,
                                  const StepObserver* observer) const {
    if (segment.eigen_index < 0) {
        advance_ramp(state, a, b, observer);
        return;
    }
    const Eigensystem& system = eigensystems_[static_cast<std::size_t>(segment.eigen_index)];
    if (observer == nullptr) {
        apply_eigen(state.amplitudes, system, b - a);
        return;
    }
    const double length = b - a;
    const int steps = std::max(1, static_cast<int>(std::ceil(length / step_size(a, b) - 1e-9)));
    const double dt = length / steps;
    for (int s = 0; s < steps; ++s) {
        apply_eigen(state.amplitudes, system, dt);
        (*observer)(a + (s + 1) * dt, state);
    }
}

void Propagator::advance(QuantumState& state, double t_from, double t_to, const StepObserver* observer) const {
    if (state.amplitudes.size() != static_cast<Eigen::Index>(spec_.dimension())) {
        throw std::invalid_argument("state dimension does not match the Hamiltonian");
    }
    if (!(t_from >= 0.0) || t_to < t_from || t_to > spec_.duration + 1e-9) {
        throw std::out_of_range("invalid propagation window");
    }
    t_to = std::min(t_to, spec_.duration);
    for (const Segment& seg : segments_) {
        const double a = std::max(seg.start, t_from);
        const double b = std::min(seg.end, t_to);
        if (b - a <= 1e-14) {
            continue;
        }
        if (seg.constant) {
            advance_constant(state, seg, a, b, observer);
        } else {
            advance_ramp(state, a, b, observer);
        }
    }
}

QuantumState Propagator::run(const StepObserver* observer) const {
    QuantumState state = QuantumState::ground(spec_.n_atoms());
    advance(state, 0.0, spec_.duration, observer);
    return state;
}

QuantumState evolve(const HamiltonianSpec& spec, const EvolutionConfig& config) {
    return Propagator(spec, config).run();
}

QuantumState evolve(const HamiltonianSpec& spec, const EvolutionConfig& config, const StepObserver& observer) {
    return Propagator(spec, config).run(&observer);
}

std::vector<double> rydberg_probabilities(const QuantumState& state) {
    const int n = state.n_qubits();
    std::vector<double> probs(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index x = 0; x < state.amplitudes.size(); ++x) {
        const double p = std::norm(state.amplitudes[x]);
        for (int i = 0; i < n; ++i) {
            if (((x >> i) & 1) != 0) {
                probs[static_cast<std::size_t>(i)] += p;
            }
        }
    }
    return probs;
}

double predict(const QuantumState& state) {
    const auto probs = rydberg_probabilities(state);
    double sum = 0.0;
    for (double p : probs) {
        sum += p;
    }
    return sum / static_cast<double>(probs.size());
}

int hard_label(double soft) { return soft >= 0.5 ? 1 : 0; }

std::map<std::string, int> sample_shots(const QuantumState& state, int n_shots, std::uint64_t seed) {
    if (n_shots < 1) {
        throw std::invalid_argument("n_shots must be at least 1");
    }
    const int n = state.n_qubits();
    std::vector<double> cumulative(static_cast<std::size_t>(state.amplitudes.size()));
    double total = 0.0;
    for (Eigen::Index x = 0; x < state.amplitudes.size(); ++x) {
        total += std::norm(state.amplitudes[x]);
        cumulative[static_cast<std::size_t>(x)] = total;
    }
    auto rng = make_rng(seed, {0x5307});
    std::uniform_real_distribution<double> uniform(0.0, total);
    std::vector<int> hits(cumulative.size(), 0);
    for (int s = 0; s < n_shots; ++s) {
        const double u = uniform(rng);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t idx = static_cast<std::size_t>(std::distance(cumulative.begin(), it));
        idx = std::min(idx, cumulative.size() - 1);
        // Skip zero-probability outcomes that upper_bound can land on at the edge.
        while (idx > 0 && cumulative[idx] == cumulative[idx - 1]) {
            --idx;
        }
        ++hits[idx];
    }
    std::map<std::string, int> counts;
    for (std::size_t x = 0; x < hits.size(); ++x) {
        if (hits[x] == 0) {
            continue;
        }
        std::string bits(static_cast<std::size_t>(n), '0');
        for (int i = 0; i < n; ++i) {
            if (((x >> i) & 1U) != 0U) {
                bits[static_cast<std::size_t>(i)] = '1';
            }
        }
        counts[bits] = hits[x];
    }
    return counts;
}

double shot_estimate(const std::map<std::string, int>& counts) {
    double ones = 0.0;
    double total = 0.0;
    for (const auto& [bits, count] : counts) {
        for (char c : bits) {
            if (c == '1') {
                ones += count;
            }
        }
        total += static_cast<double>(count) * static_cast<double>(bits.size());
    }
    if (total == 0.0) {
        throw std::invalid_argument("empty shot histogram");
    }
    return ones / total;
}

namespace {

PulseSchedule jitter(const PulseSchedule& schedule, double sigma, bool relative, std::mt19937_64& rng) {
    const auto& bps = schedule.breakpoints();
    std::vector<double> values;
    values.reserve(bps.size());
    std::normal_distribution<double> gauss(0.0, sigma);
    for (const auto& b : bps) {
        const double z = gauss(rng);
        if (relative) {
            values.push_back(schedule.limits().clamp(b.value * (1.0 + z)));
        } else {
            values.push_back(b.value + z);
        }
    }
    return schedule.with_values(values);
}

}  // namespace

HamiltonianSpec perturb(const HamiltonianSpec& spec, const NoiseSpec& noise) {
    noise.validate();
    HamiltonianSpec out = spec;

    if (noise.position_sigma > 0.0) {
        bool accepted = false;
        for (int attempt = 0; attempt < kMaxPositionRedraws && !accepted; ++attempt) {
            auto rng = make_rng(noise.seed, {1, static_cast<std::uint64_t>(attempt)});
            std::normal_distribution<double> gauss(0.0, noise.position_sigma);
            for (std::size_t i = 0; i < spec.grid.positions.size(); ++i) {
                out.grid.positions[i].x = spec.grid.positions[i].x + gauss(rng);
                out.grid.positions[i].y = spec.grid.positions[i].y + gauss(rng);
            }
            accepted = out.grid.n_atoms() < 2 || min_pair_distance(out.grid) >= kMinAtomSpacingUm;
        }
        if (!accepted) {
            throw std::runtime_error("position noise keeps violating the spacing floor after " +
                                     std::to_string(kMaxPositionRedraws) + " redraws");
        }
        refresh_interactions(out);
    }
    if (noise.rabi_relative_sigma > 0.0) {
        auto rng = make_rng(noise.seed, {2});
        out.omega = jitter(spec.omega, noise.rabi_relative_sigma, true, rng);
    }
    if (noise.detuning_sigma > 0.0) {
        auto rng_global = make_rng(noise.seed, {3});
        out.delta = jitter(spec.delta, noise.detuning_sigma, false, rng_global);
        auto rng_local = make_rng(noise.seed, {4});
        out.local_delta = jitter(spec.local_delta, noise.detuning_sigma, false, rng_local);
    }
    return out;
}

}  // namespace rydode
