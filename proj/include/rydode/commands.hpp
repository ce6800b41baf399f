#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rydode/analog_program.hpp"
#include "rydode/noise_harness.hpp"
#include "rydode/serialization.hpp"

namespace rydode {

// Environment variable naming the directory that relative dataset paths are
// resolved against.
inline constexpr const char* kDataDirEnv = "RYDODE_DATA_DIR";

// Everything a command can be configured with. Loaded from a JSON document;
// any missing key keeps its default, and CLI flags are applied on top.
struct RunConfig {
    DatasetSource dataset;
    GridConfig grid = GridConfig::square;
    int atoms = 4;
    double spacing = 12.0;
    PulseTiming timing;
    std::array<ChannelLimits, 3> limits = {ChannelLimits::defaults(Channel::rabi),
                                           ChannelLimits::defaults(Channel::global_detuning),
                                           ChannelLimits::defaults(Channel::local_detuning)};
    EvolutionConfig evolution;
    TrainConfig training;
    NoiseSpec noise;
    int n_ensemble = 20;
    std::vector<double> sigma_multipliers = kDefaultSigmaMultipliers;
    int shots = 0;
    std::uint64_t seed = 0;

    // Sets the run seed and every seed derived from it.
    void set_seed(std::uint64_t value);
};

RunConfig run_config_from_json(const json& j);
json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

std::filesystem::path resolve_data_path(const std::string& path);
RawDataset load_dataset(const DatasetSource& source);

struct PreparedData {
    RawDataset train_raw;
    RawDataset test_raw;
    PCAModel pca;
    FeatureScaler scaler;
    std::vector<EncodedSample> train;
    std::vector<EncodedSample> test;
};

// Load, split, fit PCA and scaler on the training part, encode both parts.
PreparedData prepare_data(const RunConfig& config);

ModelShape model_shape(const RunConfig& config);

struct TrainingRun {
    Checkpoint checkpoint;
    PreparedData data;
    std::vector<double> test_predictions;
    Metrics test_metrics;
};

TrainingRun run_training(const RunConfig& config);

// `train`: writes the checkpoint to `out` and the per-iteration history next
// to it as <out>.history.csv.
TrainingRun cmd_train(const RunConfig& config, const std::filesystem::path& out);

struct EvalData {
    std::optional<std::string> csv_path;  // explicit file, every row is evaluated
    std::string label_column;             // defaults to the checkpoint's label column
    std::string split = "test";           // train | test | all, when csv_path is unset
};

struct EvalResult {
    Metrics metrics;
    std::vector<double> soft_labels;
    std::vector<int> labels;
};

// Encoded samples the checkpoint should be evaluated on.
std::vector<EncodedSample> checkpoint_samples(const Checkpoint& checkpoint, const EvalData& data);

// `eval`: metrics and per-sample soft labels. shots > 0 replaces exact
// probabilities with shot estimates.
EvalResult cmd_eval(const Checkpoint& checkpoint, const EvalData& data, int shots, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& out);

struct SweepRow {
    std::string axis;
    std::string value;
    std::size_t trainable_count = 0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double test_f1 = 0.0;
};

// `sweep`: one model per value of spacing, grid, or intervals.
std::vector<SweepRow> cmd_sweep(const RunConfig& config, const std::string& axis,
                                const std::vector<std::string>& values,
                                const std::optional<std::filesystem::path>& out);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct NoiseStudy {
    RobustnessReport reference;  // report at multiplier 1
    std::vector<SweepPoint> sweep;
    double spearman_rho = 0.0;
    double spearman_p = 1.0;
};

// `noise`: robustness report plus sigma sweep curves. Writes <out> (JSON) and
// <out>.sweep.csv.
NoiseStudy cmd_noise(const Checkpoint& checkpoint, const EvalData& data, const NoiseSpec& noise,
                     const std::vector<double>& multipliers, int n_ensemble,
                     const std::optional<std::filesystem::path>& out);
std::string noise_study_json(const NoiseStudy& study);

// Program for one raw feature vector, realized with the checkpoint.
AnalogProgram checkpoint_program(const Checkpoint& checkpoint, const Eigen::VectorXd& raw_features);
ProgramLimits checkpoint_limits(const Checkpoint& checkpoint);

// `export`: writes nothing unless every constraint holds; throws ExportError.
std::string cmd_export(const Checkpoint& checkpoint, const Eigen::VectorXd& raw_features,
                       const std::optional<std::filesystem::path>& out);

// `synth`: two-blob CSV in the ingestion format.
RawDataset cmd_synth(const BlobConfig& config, const std::filesystem::path& out);

}  // namespace rydode
