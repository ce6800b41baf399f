#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rydode/data.hpp"
#include "rydode/noise_harness.hpp"
#include "rydode/training.hpp"

namespace rydode {

using json = nlohmann::json;

inline constexpr int kCheckpointFormatVersion = 1;

// Where the training data came from and how it was split; enough to rebuild
// the same train / test partition later.
struct DatasetSource {
    std::string kind = "synthetic";  // csv | idx | synthetic
    std::string provenance = "synthetic";
    std::string path;                // csv
    std::string label_column = "label";
    std::string images;              // idx
    std::string labels;              // idx
    int class_a = 0;
    int class_b = 1;
    std::size_t sample_cap = 1000;
    BlobConfig blobs;                // synthetic
    double train_fraction = 0.8;
    std::uint64_t split_seed = 0;
    std::size_t n_raw_features = 0;
};

struct Checkpoint {
    int format_version = kCheckpointFormatVersion;
    ModelParameters params;
    PCAModel pca;
    FeatureScaler scaler;
    TrainConfig train_config;
    TrainHistory history;
    DatasetSource dataset;
    std::uint64_t seed = 0;
};

json to_json(const AtomGrid& grid);
AtomGrid grid_from_json(const json& j);
json to_json(const PulseTiming& timing);
PulseTiming timing_from_json(const json& j);
json to_json(const EvolutionConfig& config);
EvolutionConfig evolution_from_json(const json& j);
json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const json& j);
json to_json(const NoiseSpec& noise);
NoiseSpec noise_from_json(const json& j, NoiseSpec defaults = {});
json to_json(const BlobConfig& blobs);
BlobConfig blobs_from_json(const json& j, BlobConfig defaults = {});
json to_json(const DatasetSource& source);
DatasetSource dataset_from_json(const json& j, DatasetSource defaults = {});

json to_json(const Checkpoint& checkpoint);
// Throws std::runtime_error for unsupported versions or malformed documents.
Checkpoint checkpoint_from_json(const json& j);

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

json to_json(const RobustnessReport& report);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace rydode
