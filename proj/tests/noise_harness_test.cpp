#include "rydode/noise_harness.hpp"

#include <gtest/gtest.h>

#include "rydode/rng.hpp"
#include "support/reference_instance.hpp"

using namespace rydode;

namespace {

std::vector<EncodedSample> eval_set() {
    std::vector<EncodedSample> out;
    const double pulses[4][3] = {{2.0, 5.5, -1.7}, {5.9, 1.8, -5.0}, {3.3, 3.3, -3.3}, {1.6, 6.2, -6.2}};
    for (int i = 0; i < 4; ++i) {
        EncodedSample s;
        s.pulse_inputs = {pulses[i][0], pulses[i][1], pulses[i][2]};
        s.coupling_inputs = {0.2 * i, 1.0 - 0.2 * i};
        s.label = i % 2;
        out.push_back(s);
    }
    return out;
}

TEST(Robustness, ZeroSigmaReproducesIdeal) {
    const auto p = fixture::reference_params();
    const auto r = robustness_eval(p, eval_set(), NoiseSpec{0.0, 0.0, 0.0, 4}, 20);
    EXPECT_EQ(r.flip_rate, 0.0);
    EXPECT_EQ(r.member_flip_rate, 0.0);
    EXPECT_EQ(r.mean_abs_shift, 0.0);
    for (const auto& s : r.samples) {
        EXPECT_EQ(s.noisy_mean, s.ideal);
        EXPECT_EQ(s.noisy_std, 0.0);
    }
    EXPECT_EQ(r.ideal_accuracy, r.noisy_accuracy);
}

TEST(Robustness, ReportIsInternallyConsistent) {
    const auto p = fixture::reference_params();
    NoiseSpec noise;
    noise.seed = 8;
    const auto r = robustness_eval(p, eval_set(), noise, 4);
    ASSERT_EQ(r.samples.size(), 4u);
    double ideal_correct = 0, noisy_correct = 0, shift = 0, flips = 0;
    for (const auto& s : r.samples) {
        ideal_correct += hard_label(s.ideal) == s.label;
        noisy_correct += hard_label(s.noisy_mean) == s.label;
        shift += std::abs(s.noisy_mean - s.ideal);
        flips += s.flip;
        EXPECT_EQ(s.flip, hard_label(s.ideal) != hard_label(s.noisy_mean));
        if (s.flip) EXPECT_LE((s.ideal - 0.5) * (s.noisy_mean - 0.5), 0.0);
    }
    EXPECT_DOUBLE_EQ(r.ideal_accuracy, ideal_correct / 4);
    EXPECT_DOUBLE_EQ(r.noisy_accuracy, noisy_correct / 4);
    EXPECT_DOUBLE_EQ(r.accuracy_delta, r.noisy_accuracy - r.ideal_accuracy);
    EXPECT_NEAR(r.mean_abs_shift, shift / 4, 1e-15);
    EXPECT_DOUBLE_EQ(r.flip_rate, flips / 4);
}

TEST(Robustness, EnsemblePrefixShared) {
    const auto p = fixture::reference_params();
    NoiseSpec noise;
    noise.seed = 31;
    const auto set = eval_set();
    const auto one = robustness_eval(p, std::span(set).first(1), noise, 1);
    // Member 0 of sample 0 is the same draw whatever the ensemble size.
    noise.seed = 31;
    EXPECT_EQ(one.samples[0].noisy_mean,
              forward_noisy(p, set[0], NoiseSpec{noise.position_sigma, noise.rabi_relative_sigma,
                                                 noise.detuning_sigma, derive_seed(31, {0, 0})}));
    const auto many = robustness_eval(p, std::span(set).first(1), noise, 10);
    EXPECT_NE(many.samples[0].noisy_mean, one.samples[0].noisy_mean);
}

TEST(Robustness, Errors) {
    const auto p = fixture::reference_params();
    EXPECT_THROW(robustness_eval(p, std::vector<EncodedSample>{}, NoiseSpec{}, 2), std::invalid_argument);
    EXPECT_THROW(robustness_eval(p, eval_set(), NoiseSpec{}, 0), std::invalid_argument);
}

TEST(Spearman, RanksAndPValues) {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    EXPECT_NEAR(spearman(x, std::vector<double>{2, 4, 6, 8, 10}), 1.0, 1e-15);
    EXPECT_NEAR(spearman(x, std::vector<double>{5, 4, 3, 2, 1}), -1.0, 1e-15);
    // Perfect order among 5 has probability 1/120 under the null.
    EXPECT_NEAR(spearman_p_value(x, std::vector<double>{1, 2, 3, 4, 5}), 1.0 / 120, 1e-12);
    // Ties use average ranks.
    EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 1, 2}), std::sqrt(3.0) / 2, 1e-12);
    // Large n: t approximation; a strong trend is significant.
    std::vector<double> a, b;
    for (int i = 0; i < 30; ++i) a.push_back(i), b.push_back(i + ((i * 7) % 5));
    EXPECT_LT(spearman_p_value(a, b), 0.001);
}

TEST(Sweep, DefaultGridShape) {
    const auto p = fixture::reference_params();
    NoiseSpec noise;
    noise.seed = 2;
    const auto set = eval_set();
    const auto sweep = noise_sweep(p, std::span(set).first(2), noise, kDefaultSigmaMultipliers, 2);
    ASSERT_EQ(sweep.size(), 5u);
    EXPECT_EQ(sweep[0].report.mean_abs_shift, 0.0);
    EXPECT_DOUBLE_EQ(sweep[3].report.noise.detuning_sigma, 2 * noise.detuning_sigma);
}

}  // namespace
