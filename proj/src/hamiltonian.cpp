#include "rydode/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rydode {

namespace {

constexpr double kTimeTolerance = 1e-9;  // µs

}  // namespace

ChannelValues HamiltonianSpec::channels_at(double t) const {
    return {omega.sample(std::min(t, omega.duration())), delta.sample(std::min(t, delta.duration())),
            local_delta.sample(std::min(t, local_delta.duration()))};
}

void HamiltonianSpec::diagonal(const ChannelValues& values, std::vector<double>& out) const {
    const std::size_t dim = dimension();
    out.resize(dim);
    for (std::size_t x = 0; x < dim; ++x) {
        out[x] = basis_interaction[x] - values.delta * basis_occupation[x] - values.local_delta * basis_coupling[x];
    }
}

double HamiltonianSpec::norm_bound(const ChannelValues& values) const {
    double diag_max = 0.0;
    for (std::size_t x = 0; x < dimension(); ++x) {
        const double d =
            basis_interaction[x] - values.delta * basis_occupation[x] - values.local_delta * basis_coupling[x];
        diag_max = std::max(diag_max, std::abs(d));
    }
    return n_atoms() * std::abs(values.omega) / 2.0 + diag_max;
}

std::vector<double> HamiltonianSpec::breakpoint_times() const {
    std::vector<double> times;
    for (const PulseSchedule* s : {&omega, &delta, &local_delta}) {
        for (const auto& b : s->breakpoints()) {
            times.push_back(std::clamp(b.time, 0.0, duration));
        }
    }
    times.push_back(0.0);
    times.push_back(duration);
    std::sort(times.begin(), times.end());
    std::vector<double> unique;
    for (double t : times) {
        if (unique.empty() || t - unique.back() > 1e-12) {
            unique.push_back(t);
        }
    }
    unique.back() = duration;
    return unique;
}

void refresh_interactions(HamiltonianSpec& spec) {
    const int n = spec.n_atoms();
    spec.interactions = interaction_matrix(spec.grid);
    const std::size_t dim = std::size_t{1} << n;
    spec.basis_interaction.assign(dim, 0.0);
    spec.basis_occupation.assign(dim, 0.0);
    spec.basis_coupling.assign(dim, 0.0);
    for (std::size_t x = 0; x < dim; ++x) {
        for (int i = 0; i < n; ++i) {
            if (((x >> i) & 1U) == 0U) {
                continue;
            }
            spec.basis_occupation[x] += 1.0;
            spec.basis_coupling[x] += spec.h[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < n; ++j) {
                if (((x >> j) & 1U) != 0U) {
                    spec.basis_interaction[x] += spec.interactions(i, j);
                }
            }
        }
    }
}

HamiltonianSpec assemble(AtomGrid grid, PulseSchedule omega, PulseSchedule delta, PulseSchedule local_delta,
                         std::vector<double> h) {
    const auto n = grid.n_atoms();
    if (n == 0 || n > static_cast<std::size_t>(kMaxAtoms)) {
        throw std::invalid_argument("register size must be in [1, " + std::to_string(kMaxAtoms) + "], got " +
                                    std::to_string(n));
    }
    if (h.size() != n) {
        throw std::invalid_argument("expected " + std::to_string(n) + " local detuning couplings, got " +
                                    std::to_string(h.size()));
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] >= 0.0 && h[i] <= 1.0)) {
            throw std::invalid_argument("coupling h[" + std::to_string(i) + "] = " + std::to_string(h[i]) +
                                        " outside [0, 1]");
        }
    }
    const double duration = omega.duration();
    if (std::abs(delta.duration() - duration) > kTimeTolerance ||
        std::abs(local_delta.duration() - duration) > kTimeTolerance) {
        throw std::invalid_argument("channel schedules have different durations");
    }
    if (duration > kMaxDurationUs + kTimeTolerance) {
        throw std::invalid_argument("program duration " + std::to_string(duration) + " us exceeds " +
                                    std::to_string(kMaxDurationUs) + " us");
    }

    HamiltonianSpec spec;
    spec.grid = std::move(grid);
    spec.omega = std::move(omega);
    spec.delta = std::move(delta);
    spec.local_delta = std::move(local_delta);
    spec.h = std::move(h);
    spec.duration = duration;
    refresh_interactions(spec);
    return spec;
}

HermitianOperator dense_operator(const HamiltonianSpec& spec, const ChannelValues& values) {
    const auto dim = static_cast<Eigen::Index>(spec.dimension());
    const int n = spec.n_atoms();
    HermitianOperator op = HermitianOperator::Zero(dim, dim);
    std::vector<double> diag;
    spec.diagonal(values, diag);
    // With φ = 0 the drive term is (Ω/2)σ_x on every atom.
    const std::complex<double> drive = values.omega / 2.0 * std::polar(1.0, spec.phi);
    for (Eigen::Index x = 0; x < dim; ++x) {
        op(x, x) = diag[static_cast<std::size_t>(x)];
        for (int i = 0; i < n; ++i) {
            const Eigen::Index flipped = x ^ (Eigen::Index{1} << i);
            // |g⟩⟨r| e^{iφ} lowers bit i, |r⟩⟨g| e^{-iφ} raises it.
            const bool raised = ((x >> i) & 1) != 0;
            op(x, flipped) = raised ? std::conj(drive) : drive;
        }
    }
    return op;
}

HermitianOperator evaluate(const HamiltonianSpec& spec, double t) {
    if (!(t >= 0.0) || t > spec.duration + kTimeTolerance) {
        throw std::out_of_range("time " + std::to_string(t) + " outside [0, " + std::to_string(spec.duration) + "]");
    }
    return dense_operator(spec, spec.channels_at(std::min(t, spec.duration)));
}

}  // namespace rydode
