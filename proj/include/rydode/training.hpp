#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "rydode/data.hpp"
#include "rydode/grid.hpp"
#include "rydode/hamiltonian.hpp"
#include "rydode/pulse.hpp"
#include "rydode/simulator.hpp"

namespace rydode {

inline constexpr std::array<Channel, 3> kChannels = {Channel::rabi, Channel::global_detuning,
                                                     Channel::local_detuning};

// Frozen model structure that the trainable parameters are interpreted against.
struct ModelShape {
    AtomGrid grid;
    PulseTiming timing;
    std::array<ChannelLimits, 3> limits = {ChannelLimits::defaults(Channel::rabi),
                                           ChannelLimits::defaults(Channel::global_detuning),
                                           ChannelLimits::defaults(Channel::local_detuning)};
    EvolutionConfig evolution;

    int n_atoms() const { return static_cast<int>(grid.n_atoms()); }
};

// Trainable parameters: one (scale, offset) pair per interval per channel and
// one local-detuning coupling per odd-indexed atom. Even-indexed atoms take
// their coupling from the encoded sample.
//
// Flat layout: [channel][interval][scale, offset] followed by the couplings.
struct ModelParameters {
    std::array<std::vector<ThetaPair>, 3> pulse_thetas;
    std::vector<double> coupling_params;
    ModelShape shape;

    // Every trainable value set to 1.0. Throws std::invalid_argument for an
    // odd or zero atom count, or invalid timing.
    static ModelParameters initial(ModelShape shape);

    std::size_t trainable_count() const;
    std::size_t input_count() const;

    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    std::size_t scale_index(int channel, int interval) const;
    std::size_t offset_index(int channel, int interval) const;
    std::size_t coupling_index(int pair) const;

    // Per-atom h: even atoms from the sample, odd atoms from coupling_params
    // clamped to [0, 1].
    std::vector<double> realized_h(const EncodedSample& sample) const;
};

// Builds the per-sample Hamiltonian. Throws on inconsistent dimensions.
HamiltonianSpec realize(const ModelParameters& params, const EncodedSample& sample);

// Soft label of one sample.
double forward(const ModelParameters& params, const EncodedSample& sample);
std::vector<double> forward_all(const ModelParameters& params, std::span<const EncodedSample> samples);

inline constexpr double kBceEpsilon = 1e-7;

double bce_loss(double pred, int label);
double batch_loss(const ModelParameters& params, std::span<const EncodedSample> batch);

// Central differences of the mean batch loss.
std::vector<double> grad_fd(const ModelParameters& params, std::span<const EncodedSample> batch,
                            double fd_step = 1e-3);

// Stochastic pulse gradient: for each sample, n_time_samples evolution times
// are drawn uniformly; at each time a ±π/4 rotation about X_i or Z_i is
// inserted on every atom i and the resulting soft-label differences give the
// functional derivative of the prediction with respect to each control. These
// are weighted by ∂(control)/∂θ and the BCE derivative. Draw (sample s, draw r)
// uses the stream derive_seed(seed, {s, r}).
std::vector<double> grad_stochastic(const ModelParameters& params, std::span<const EncodedSample> batch,
                                    int n_time_samples, std::uint64_t seed);

struct AdamConfig {
    double step = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long long t = 0;
};

// Throws std::invalid_argument on mismatched lengths.
void adam_step(AdamState& state, std::vector<double>& params, std::span<const double> gradient,
               const AdamConfig& config = {});

enum class GradientMode { finite_difference, stochastic_pulse };

std::string_view to_string(GradientMode mode);
GradientMode parse_gradient_mode(std::string_view name);

struct TrainConfig {
    int iterations = 75;
    AdamConfig adam;
    GradientMode gradient_mode = GradientMode::finite_difference;
    int stochastic_samples = 20;
    double fd_step = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Metrics {
    double accuracy = 0.0;
    double f1 = 0.0;
};

// Entry i holds loss and accuracy after the i-th update.
struct TrainHistory {
    double initial_loss = 0.0;
    std::vector<double> loss;
    std::vector<double> train_accuracy;
    double wall_time_seconds = 0.0;
    Metrics final_metrics;
};

// Full-batch Adam from `init`. Throws std::invalid_argument on an empty or
// single-class training set.
std::pair<ModelParameters, TrainHistory> train(const ModelParameters& init, std::span<const EncodedSample> train_set,
                                               const TrainConfig& config);

// Hard labels at 0.5 (ties go to class 1); F1 of class 1, 0 when P + R = 0.
// Throws std::invalid_argument on empty or mismatched input.
Metrics evaluate_metrics(std::span<const double> preds, std::span<const int> labels);

}  // namespace rydode
