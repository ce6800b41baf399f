#pragma once

#include <span>
#include <vector>

#include "rydode/simulator.hpp"
#include "rydode/training.hpp"

namespace rydode {

struct SampleRobustness {
    int label = 0;
    double ideal = 0.0;
    double noisy_mean = 0.0;
    double noisy_std = 0.0;
    bool flip = false;               // ideal and ensemble-mean hard labels differ
    double member_flip_rate = 0.0;   // fraction of members whose hard label differs from ideal
};

struct RobustnessReport {
    NoiseSpec noise;
    int n_ensemble = 0;
    std::vector<SampleRobustness> samples;
    double flip_rate = 0.0;
    double member_flip_rate = 0.0;
    double mean_abs_shift = 0.0;
    double ideal_accuracy = 0.0;
    double noisy_accuracy = 0.0;
    double accuracy_delta = 0.0;  // noisy − ideal
};

// Soft label of one sample under one noise draw.
double forward_noisy(const ModelParameters& params, const EncodedSample& sample, const NoiseSpec& noise);

// Runs the ideal pass and n_ensemble perturbed passes per sample. Member m of
// sample s uses seed derive_seed(noise.seed, {s, m}), so a smaller ensemble is
// a prefix of a larger one. Throws std::invalid_argument for an empty eval set
// or n_ensemble < 1.
RobustnessReport robustness_eval(const ModelParameters& params, std::span<const EncodedSample> eval_set,
                                 const NoiseSpec& noise, int n_ensemble);

inline const std::vector<double> kDefaultSigmaMultipliers = {0.0, 0.5, 1.0, 2.0, 4.0};

struct SweepPoint {
    double multiplier = 0.0;
    RobustnessReport report;
};

std::vector<SweepPoint> noise_sweep(const ModelParameters& params, std::span<const EncodedSample> eval_set,
                                    const NoiseSpec& base, std::span<const double> multipliers, int n_ensemble);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

// One-sided p-value for H1: ρ > 0. Exact permutation distribution for n ≤ 8,
// t approximation above.
double spearman_p_value(std::span<const double> x, std::span<const double> y);

}  // namespace rydode
