#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rydode {

struct RawDataset {
    Eigen::MatrixXd features;  // n_samples × n_raw_features
    std::vector<int> labels;   // 0/1
    std::string provenance;    // mnist-pair, fashion-pair, pid, synthetic, csv

    std::size_t size() const { return labels.size(); }
    std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }

    // Rows selected by index, same provenance.
    RawDataset subset(const std::vector<std::size_t>& rows) const;
};

// Reads an IDX image file and its label file, keeps the two requested
// classes (class_a → 0, class_b → 1) and draws a seeded uniform subsample of
// at most sample_cap points. Throws std::runtime_error on bad magic numbers,
// truncated payloads, or when either class is absent.
RawDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int class_a,
                    int class_b, std::size_t sample_cap, std::uint64_t seed, std::string provenance = "mnist-pair");

// Numeric CSV with a header row. Labels must be 0/1. Throws
// std::runtime_error on a missing label column, a non-numeric cell, ragged
// rows, or an empty file.
RawDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                    std::string provenance = "csv");

void write_csv(const RawDataset& data, const std::filesystem::path& path, const std::string& label_column = "label");

struct PCAModel {
    Eigen::VectorXd mean;                      // n_raw_features
    Eigen::MatrixXd components;                // k × n_raw_features, orthonormal rows
    Eigen::VectorXd explained_variance_ratio;  // k, non-increasing

    int k() const { return static_cast<int>(components.rows()); }
    Eigen::VectorXd project(const Eigen::VectorXd& raw) const;
    Eigen::MatrixXd project_all(const Eigen::MatrixXd& raw) const;
};

// Top-k principal components of the training data. Each component's
// largest-magnitude entry is made positive. Throws std::invalid_argument when
// k is outside [1, min(n_samples, n_raw_features)] or the data has zero
// variance.
PCAModel fit_pca(const RawDataset& train, int k);

enum class SlotKind { rabi, global_detuning, local_detuning, coupling };

struct ScalerSlot {
    SlotKind kind = SlotKind::rabi;
    double fit_min = 0.0;
    double fit_max = 0.0;
    double target_min = 0.0;
    double target_max = 0.0;

    // MinMax map into [target_min, target_max], clamping outside the fitted
    // range. A degenerate fit (min == max) maps to the target midpoint.
    double apply(double raw) const;
};

// Slot order: rabi, global detuning, local detuning, then one coupling slot
// per even-indexed atom.
struct FeatureScaler {
    std::vector<ScalerSlot> slots;

    static std::pair<double, double> target_range(SlotKind kind);
    static FeatureScaler fit(const Eigen::MatrixXd& projections, int n_atoms);
};

// Number of PCA features the model consumes: 3 pulse inputs plus N/2 couplings.
int input_count(int n_atoms);

struct EncodedSample {
    std::array<double, 3> pulse_inputs{};  // ω for rabi, global and local detuning (rad/µs)
    std::vector<double> coupling_inputs;   // h for atoms 0, 2, 4, ...
    int label = 0;
};

// Throws std::invalid_argument on PCA / scaler / feature dimension mismatch.
EncodedSample encode(const Eigen::VectorXd& raw, const PCAModel& pca, const FeatureScaler& scaler, int n_atoms,
                     int label = 0);

std::vector<EncodedSample> encode_all(const RawDataset& data, const PCAModel& pca, const FeatureScaler& scaler,
                                      int n_atoms);

// Seeded, label-stratified split into (first, second) with `fraction` of each
// class going to first. Throws std::invalid_argument for fraction outside
// (0, 1) or when either part would miss a class.
std::pair<RawDataset, RawDataset> train_test_split(const RawDataset& data, double fraction, std::uint64_t seed);

struct BlobConfig {
    int n_samples = 250;
    int n_features = 5;
    double separation = 4.0;  // distance between centers, in units of sigma
    double sigma = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Two isotropic Gaussian blobs, balanced classes, centers separated along the
// first feature axis.
RawDataset make_blobs(const BlobConfig& config);

}  // namespace rydode
