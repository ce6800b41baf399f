#include "rydode/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "rydode/rng.hpp"

namespace rydode {

ModelParameters ModelParameters::initial(ModelShape shape) {
    const int n = shape.n_atoms();
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("the model needs an even number of atoms, got " + std::to_string(n));
    }
    shape.timing.validate();
    shape.evolution.validate();
    ModelParameters p;
    for (auto& thetas : p.pulse_thetas) {
        thetas.assign(static_cast<std::size_t>(shape.timing.n_intervals), ThetaPair{1.0, 1.0});
    }
    p.coupling_params.assign(static_cast<std::size_t>(n / 2), 1.0);
    p.shape = std::move(shape);
    return p;
}

std::size_t ModelParameters::trainable_count() const {
    return 6 * static_cast<std::size_t>(shape.timing.n_intervals) + coupling_params.size();
}

std::size_t ModelParameters::input_count() const { return static_cast<std::size_t>(rydode::input_count(shape.n_atoms())); }

std::size_t ModelParameters::scale_index(int channel, int interval) const {
    return static_cast<std::size_t>(channel * 2 * shape.timing.n_intervals + 2 * interval);
}

std::size_t ModelParameters::offset_index(int channel, int interval) const {
    return scale_index(channel, interval) + 1;
}

std::size_t ModelParameters::coupling_index(int pair) const {
    return 6 * static_cast<std::size_t>(shape.timing.n_intervals) + static_cast<std::size_t>(pair);
}

std::vector<double> ModelParameters::flatten() const {
    std::vector<double> flat;
    flat.reserve(trainable_count());
    for (const auto& thetas : pulse_thetas) {
        for (const auto& t : thetas) {
            flat.push_back(t.scale);
            flat.push_back(t.offset);
        }
    }
    flat.insert(flat.end(), coupling_params.begin(), coupling_params.end());
    return flat;
}

void ModelParameters::assign(std::span<const double> flat) {
    if (flat.size() != trainable_count()) {
        throw std::invalid_argument("expected " + std::to_string(trainable_count()) + " parameters, got " +
                                    std::to_string(flat.size()));
    }
    std::size_t i = 0;
    for (auto& thetas : pulse_thetas) {
        for (auto& t : thetas) {
            t.scale = flat[i++];
            t.offset = flat[i++];
        }
    }
    for (auto& c : coupling_params) {
        c = flat[i++];
    }
}

std::vector<double> ModelParameters::realized_h(const EncodedSample& sample) const {
    const int n = shape.n_atoms();
    if (sample.coupling_inputs.size() != static_cast<std::size_t>(n / 2)) {
        throw std::invalid_argument("sample carries " + std::to_string(sample.coupling_inputs.size()) +
                                    " coupling inputs, model needs " + std::to_string(n / 2));
    }
    std::vector<double> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto pair = static_cast<std::size_t>(i / 2);
        h[static_cast<std::size_t>(i)] = i % 2 == 0 ? std::clamp(sample.coupling_inputs[pair], 0.0, 1.0)
                                                    : std::clamp(coupling_params[pair], 0.0, 1.0);
    }
    return h;
}

HamiltonianSpec realize(const ModelParameters& params, const EncodedSample& sample) {
    const auto& shape = params.shape;
    std::array<PulseSchedule, 3> schedules;
    for (std::size_t c = 0; c < 3; ++c) {
        schedules[c] = build_schedule(kChannels[c], params.pulse_thetas[c], sample.pulse_inputs[c], shape.timing,
                                      shape.limits[c]);
    }
    return assemble(shape.grid, std::move(schedules[0]), std::move(schedules[1]), std::move(schedules[2]),
                    params.realized_h(sample));
}

double forward(const ModelParameters& params, const EncodedSample& sample) {
    return predict(evolve(realize(params, sample), params.shape.evolution));
}

std::vector<double> forward_all(const ModelParameters& params, std::span<const EncodedSample> samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(forward(params, s));
    }
    return out;
}

double bce_loss(double pred, int label) {
    const double p = std::clamp(pred, kBceEpsilon, 1.0 - kBceEpsilon);
    return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

namespace {

double bce_derivative(double pred, int label) {
    if (pred < kBceEpsilon || pred > 1.0 - kBceEpsilon) {
        return 0.0;
    }
    return label == 1 ? -1.0 / pred : 1.0 / (1.0 - pred);
}

}  // namespace

double batch_loss(const ModelParameters& params, std::span<const EncodedSample> batch) {
    if (batch.empty()) {
        throw std::invalid_argument("empty batch");
    }
    double total = 0.0;
    for (const auto& s : batch) {
        total += bce_loss(forward(params, s), s.label);
    }
    return total / static_cast<double>(batch.size());
}

std::vector<double> grad_fd(const ModelParameters& params, std::span<const EncodedSample> batch, double fd_step) {
    if (!(fd_step > 0.0)) {
        throw std::invalid_argument("fd_step must be positive");
    }
    const std::vector<double> base = params.flatten();
    std::vector<double> grad(base.size(), 0.0);
    ModelParameters probe = params;
    std::vector<double> shifted = base;
    for (std::size_t i = 0; i < base.size(); ++i) {
        shifted[i] = base[i] + fd_step;
        probe.assign(shifted);
        const double up = batch_loss(probe, batch);
        shifted[i] = base[i] - fd_step;
        probe.assign(shifted);
        const double down = batch_loss(probe, batch);
        shifted[i] = base[i];
        grad[i] = (up - down) / (2.0 * fd_step);
    }
    return grad;
}

namespace {

enum class Generator { x, z };

// Applies exp(−i·angle·G_atom).
void rotate(Eigen::VectorXcd& psi, Generator g, int atom, double angle) {
    const Eigen::Index bit = Eigen::Index{1} << atom;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    if (g == Generator::z) {
        const std::complex<double> ground = std::polar(1.0, -angle);
        const std::complex<double> excited = std::polar(1.0, angle);
        for (Eigen::Index x = 0; x < psi.size(); ++x) {
            psi[x] *= (x & bit) != 0 ? excited : ground;
        }
        return;
    }
    const std::complex<double> mix(0.0, -s);
    for (Eigen::Index x = 0; x < psi.size(); ++x) {
        if ((x & bit) != 0) {
            continue;
        }
        const std::complex<double> a = psi[x];
        const std::complex<double> b = psi[x | bit];
        psi[x] = c * a + mix * b;
        psi[x | bit] = mix * a + c * b;
    }
}

// f(π/4) − f(−π/4) where f(θ) is the soft label with exp(−iθG) inserted at t.
double shifted_difference(const Propagator& prop, const QuantumState& at_t, double t, Generator g, int atom) {
    constexpr double quarter = std::numbers::pi / 4.0;
    double result = 0.0;
    for (double sign : {1.0, -1.0}) {
        QuantumState branch = at_t;
        rotate(branch.amplitudes, g, atom, sign * quarter);
        prop.advance(branch, t, prop.spec().duration);
        result += sign * predict(branch);
    }
    return result;
}

}  // namespace

std::vector<double> grad_stochastic(const ModelParameters& params, std::span<const EncodedSample> batch,
                                    int n_time_samples, std::uint64_t seed) {
    if (n_time_samples < 1) {
        throw std::invalid_argument("n_time_samples must be at least 1");
    }
    if (batch.empty()) {
        throw std::invalid_argument("empty batch");
    }
    const int n = params.shape.n_atoms();
    const int m = params.shape.timing.n_intervals;
    std::vector<double> grad(params.trainable_count(), 0.0);

    for (std::size_t s = 0; s < batch.size(); ++s) {
        const EncodedSample& sample = batch[s];
        const Propagator prop(realize(params, sample), params.shape.evolution);
        const HamiltonianSpec& spec = prop.spec();
        const double duration = spec.duration;
        const double loss_slope = bce_derivative(predict(prop.run()), sample.label);
        if (loss_slope == 0.0) {
            continue;
        }
        const std::array<const PulseSchedule*, 3> schedules = {&spec.omega, &spec.delta, &spec.local_delta};

        std::vector<double> sample_grad(grad.size(), 0.0);
        for (int r = 0; r < n_time_samples; ++r) {
            auto rng = make_rng(seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(r)});
            const double t = std::uniform_real_distribution<double>(0.0, duration)(rng);

            QuantumState at_t = QuantumState::ground(n);
            prop.advance(at_t, 0.0, t);

            // Functional derivatives of the soft label with respect to each
            // control at time t. The detuning terms −Δ n_i and −δ h_i n_i equal
            // Δ Z_i / 2 and δ h_i Z_i / 2 up to constants.
            std::vector<double> dz(static_cast<std::size_t>(n));
            double d_omega = 0.0;
            for (int i = 0; i < n; ++i) {
                d_omega += 0.5 * shifted_difference(prop, at_t, t, Generator::x, i);
                dz[static_cast<std::size_t>(i)] = 0.5 * shifted_difference(prop, at_t, t, Generator::z, i);
            }
            double d_delta = 0.0;
            double d_local = 0.0;
            for (int i = 0; i < n; ++i) {
                d_delta += dz[static_cast<std::size_t>(i)];
                d_local += spec.h[static_cast<std::size_t>(i)] * dz[static_cast<std::size_t>(i)];
            }
            const std::array<double, 3> d_control = {d_omega, d_delta, d_local};

            for (int c = 0; c < 3; ++c) {
                const PulseSchedule& sched = *schedules[static_cast<std::size_t>(c)];
                const double omega_in = sample.pulse_inputs[static_cast<std::size_t>(c)];
                for (int k = 0; k < m; ++k) {
                    if (sched.hold_clamped()[static_cast<std::size_t>(k)]) {
                        continue;
                    }
                    const double sens = sched.hold_sensitivity(k, t) * d_control[static_cast<std::size_t>(c)];
                    sample_grad[params.scale_index(c, k)] += sens * omega_in;
                    sample_grad[params.offset_index(c, k)] += sens;
                }
            }
            const double local_value = spec.local_delta.sample(t);
            for (int pair = 0; pair < n / 2; ++pair) {
                const double raw = params.coupling_params[static_cast<std::size_t>(pair)];
                if (raw < 0.0 || raw > 1.0) {
                    continue;
                }
                sample_grad[params.coupling_index(pair)] += local_value * dz[static_cast<std::size_t>(2 * pair + 1)];
            }
        }
        const double weight = loss_slope * duration / static_cast<double>(n_time_samples);
        for (std::size_t i = 0; i < grad.size(); ++i) {
            grad[i] += weight * sample_grad[i];
        }
    }
    for (double& g : grad) {
        g /= static_cast<double>(batch.size());
    }
    return grad;
}

void adam_step(AdamState& state, std::vector<double>& params, std::span<const double> gradient,
               const AdamConfig& config) {
    if (gradient.size() != params.size()) {
        throw std::invalid_argument("gradient length does not match parameter count");
    }
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("optimizer state does not match parameter count");
    }
    state.t += 1;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * gradient[i];
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * gradient[i] * gradient[i];
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= config.step * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
}

std::string_view to_string(GradientMode mode) {
    return mode == GradientMode::finite_difference ? "finite_difference" : "stochastic_pulse";
}

GradientMode parse_gradient_mode(std::string_view name) {
    if (name == "finite_difference" || name == "fd") return GradientMode::finite_difference;
    if (name == "stochastic_pulse" || name == "stochastic") return GradientMode::stochastic_pulse;
    throw std::invalid_argument("unknown gradient mode '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
    if (iterations < 1) {
        throw std::invalid_argument("iterations must be at least 1, got " + std::to_string(iterations));
    }
    if (stochastic_samples < 1) {
        throw std::invalid_argument("stochastic sample count must be at least 1");
    }
    if (!(fd_step > 0.0)) {
        throw std::invalid_argument("fd_step must be positive");
    }
    if (!(adam.step > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) ||
        !(adam.epsilon > 0.0)) {
        throw std::invalid_argument("invalid Adam hyperparameters");
    }
}

namespace {

std::vector<int> labels_of(std::span<const EncodedSample> samples) {
    std::vector<int> labels;
    labels.reserve(samples.size());
    for (const auto& s : samples) {
        labels.push_back(s.label);
    }
    return labels;
}

double mean_loss(std::span<const double> preds, std::span<const int> labels) {
    double total = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        total += bce_loss(preds[i], labels[i]);
    }
    return total / static_cast<double>(preds.size());
}

}  // namespace

std::pair<ModelParameters, TrainHistory> train(const ModelParameters& init, std::span<const EncodedSample> train_set,
                                               const TrainConfig& config) {
    config.validate();
    if (train_set.empty()) {
        throw std::invalid_argument("training set is empty");
    }
    const auto labels = labels_of(train_set);
    const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
    const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
    if (!has0 || !has1) {
        throw std::invalid_argument("training set must contain both classes");
    }

    const auto started = std::chrono::steady_clock::now();
    ModelParameters params = init;
    std::vector<double> flat = params.flatten();
    AdamState adam;
    TrainHistory history;
    history.initial_loss = batch_loss(params, train_set);

    for (int it = 0; it < config.iterations; ++it) {
        const std::vector<double> grad =
            config.gradient_mode == GradientMode::finite_difference
                ? grad_fd(params, train_set, config.fd_step)
                : grad_stochastic(params, train_set, config.stochastic_samples,
                                  derive_seed(config.seed, {static_cast<std::uint64_t>(it)}));
        adam_step(adam, flat, grad, config.adam);
        params.assign(flat);

        const auto preds = forward_all(params, train_set);
        history.loss.push_back(mean_loss(preds, labels));
        history.train_accuracy.push_back(evaluate_metrics(preds, labels).accuracy);
        if (it + 1 == config.iterations) {
            history.final_metrics = evaluate_metrics(preds, labels);
        }
    }
    history.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(params), std::move(history)};
}

Metrics evaluate_metrics(std::span<const double> preds, std::span<const int> labels) {
    if (preds.empty()) {
        throw std::invalid_argument("no predictions to score");
    }
    if (preds.size() != labels.size()) {
        throw std::invalid_argument("prediction and label counts differ");
    }
    std::size_t correct = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int predicted = hard_label(preds[i]);
        correct += predicted == labels[i] ? 1 : 0;
        tp += predicted == 1 && labels[i] == 1 ? 1 : 0;
        fp += predicted == 1 && labels[i] == 0 ? 1 : 0;
        fn += predicted == 0 && labels[i] == 1 ? 1 : 0;
    }
    Metrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    return m;
}

}  // namespace rydode
