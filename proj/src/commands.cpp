#include "rydode/commands.hpp"

#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "rydode/rng.hpp"

namespace rydode {

void RunConfig::set_seed(std::uint64_t value) {
    seed = value;
    dataset.split_seed = value;
    dataset.blobs.seed = value;
    training.seed = value;
    noise.seed = value;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    try {
        if (j.contains("seed")) {
            c.set_seed(j.at("seed").get<std::uint64_t>());
        }
        if (j.contains("dataset")) {
            c.dataset = dataset_from_json(j.at("dataset"), c.dataset);
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            if (m.contains("grid")) {
                c.grid = parse_grid_config(m.at("grid").get<std::string>());
            }
            c.atoms = m.value("atoms", c.atoms);
            c.spacing = m.value("spacing", c.spacing);
            c.timing = timing_from_json(m);
        }
        if (j.contains("limits")) {
            const auto& l = j.at("limits");
            for (std::size_t ch = 0; ch < 3; ++ch) {
                const std::string key(to_string(kChannels[ch]));
                if (l.contains(key)) {
                    c.limits[ch] = {l.at(key).at(0).get<double>(), l.at(key).at(1).get<double>()};
                }
            }
        }
        if (j.contains("evolution")) {
            c.evolution = evolution_from_json(j.at("evolution"));
        }
        if (j.contains("training")) {
            const std::uint64_t seed = c.training.seed;
            c.training = train_config_from_json(j.at("training"));
            if (!j.at("training").contains("seed")) {
                c.training.seed = seed;
            }
        }
        if (j.contains("noise")) {
            c.noise = noise_from_json(j.at("noise"), c.noise);
            c.n_ensemble = j.at("noise").value("n_ensemble", c.n_ensemble);
            c.sigma_multipliers = j.at("noise").value("sigma_multipliers", c.sigma_multipliers);
        }
        c.shots = j.value("shots", c.shots);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("invalid config: ") + e.what());
    }
    return c;
}

json to_json(const RunConfig& c) {
    json limits = json::object();
    for (std::size_t ch = 0; ch < 3; ++ch) {
        limits[std::string(to_string(kChannels[ch]))] = json::array({c.limits[ch].min, c.limits[ch].max});
    }
    json model = to_json(c.timing);
    model["grid"] = std::string(to_string(c.grid));
    model["atoms"] = c.atoms;
    model["spacing"] = c.spacing;
    json noise = to_json(c.noise);
    noise["n_ensemble"] = c.n_ensemble;
    noise["sigma_multipliers"] = c.sigma_multipliers;
    return {{"seed", c.seed},
            {"dataset", to_json(c.dataset)},
            {"model", model},
            {"limits", limits},
            {"evolution", to_json(c.evolution)},
            {"training", to_json(c.training)},
            {"noise", noise},
            {"shots", c.shots}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw std::runtime_error("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

std::filesystem::path resolve_data_path(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv(kDataDirEnv); dir != nullptr && *dir != '\0') {
            p = std::filesystem::path(dir) / p;
        }
    }
    return p;
}

namespace {

std::filesystem::path existing_file(const std::string& path, const char* what) {
    if (path.empty()) {
        throw std::runtime_error(std::string("dataset ") + what + " path is not set");
    }
    const auto resolved = resolve_data_path(path);
    if (!std::filesystem::exists(resolved)) {
        throw std::runtime_error(std::string("dataset ") + what + " not found: " + resolved.string());
    }
    return resolved;
}

}  // namespace

RawDataset load_dataset(const DatasetSource& source) {
    if (source.kind == "csv") {
        return load_csv(existing_file(source.path, "file"), source.label_column, source.provenance);
    }
    if (source.kind == "idx") {
        return load_idx(existing_file(source.images, "image file"), existing_file(source.labels, "label file"),
                        source.class_a, source.class_b, source.sample_cap, source.split_seed, source.provenance);
    }
    if (source.kind == "synthetic") {
        return make_blobs(source.blobs);
    }
    throw std::runtime_error("unknown dataset kind '" + source.kind + "'");
}

PreparedData prepare_data(const RunConfig& config) {
    PreparedData out;
    const RawDataset all = load_dataset(config.dataset);
    std::tie(out.train_raw, out.test_raw) =
        train_test_split(all, config.dataset.train_fraction, config.dataset.split_seed);
    out.pca = fit_pca(out.train_raw, input_count(config.atoms));
    out.scaler = FeatureScaler::fit(out.pca.project_all(out.train_raw.features), config.atoms);
    out.train = encode_all(out.train_raw, out.pca, out.scaler, config.atoms);
    out.test = encode_all(out.test_raw, out.pca, out.scaler, config.atoms);
    return out;
}

ModelShape model_shape(const RunConfig& config) {
    ModelShape shape;
    shape.grid = build_grid(config.grid, config.atoms, config.spacing);
    shape.timing = config.timing;
    shape.limits = config.limits;
    shape.evolution = config.evolution;
    return shape;
}

TrainingRun run_training(const RunConfig& config) {
    TrainingRun run;
    const ModelShape shape = model_shape(config);
    run.data = prepare_data(config);
    auto [params, history] = train(ModelParameters::initial(shape), run.data.train, config.training);

    run.test_predictions = forward_all(params, run.data.test);
    std::vector<int> test_labels;
    for (const auto& s : run.data.test) {
        test_labels.push_back(s.label);
    }
    run.test_metrics = evaluate_metrics(run.test_predictions, test_labels);

    Checkpoint& c = run.checkpoint;
    c.params = std::move(params);
    c.pca = run.data.pca;
    c.scaler = run.data.scaler;
    c.train_config = config.training;
    c.history = std::move(history);
    c.dataset = config.dataset;
    c.dataset.n_raw_features = run.data.train_raw.n_features();
    c.seed = config.seed;
    return run;
}

TrainingRun cmd_train(const RunConfig& config, const std::filesystem::path& out) {
    TrainingRun run = run_training(config);
    save_checkpoint(run.checkpoint, out);
    std::ostringstream csv;
    csv.precision(17);
    csv << "iteration,loss,train_accuracy\n";
    csv << 0 << "," << run.checkpoint.history.initial_loss << ",\n";
    for (std::size_t i = 0; i < run.checkpoint.history.loss.size(); ++i) {
        csv << i + 1 << "," << run.checkpoint.history.loss[i] << "," << run.checkpoint.history.train_accuracy[i]
            << "\n";
    }
    write_text(out.string() + ".history.csv", csv.str());
    return run;
}

std::vector<EncodedSample> checkpoint_samples(const Checkpoint& checkpoint, const EvalData& data) {
    const int n_atoms = checkpoint.params.shape.n_atoms();
    if (data.csv_path) {
        const std::string label = data.label_column.empty() ? checkpoint.dataset.label_column : data.label_column;
        const RawDataset raw = load_csv(existing_file(*data.csv_path, "file"), label);
        if (raw.size() == 0) {
            throw std::runtime_error("evaluation file has no rows");
        }
        return encode_all(raw, checkpoint.pca, checkpoint.scaler, n_atoms);
    }
    const RawDataset all = load_dataset(checkpoint.dataset);
    if (data.split == "all") {
        return encode_all(all, checkpoint.pca, checkpoint.scaler, n_atoms);
    }
    auto [train_part, test_part] = train_test_split(all, checkpoint.dataset.train_fraction, checkpoint.dataset.split_seed);
    if (data.split == "train") {
        return encode_all(train_part, checkpoint.pca, checkpoint.scaler, n_atoms);
    }
    if (data.split == "test") {
        return encode_all(test_part, checkpoint.pca, checkpoint.scaler, n_atoms);
    }
    throw std::invalid_argument("unknown split '" + data.split + "' (expected train, test or all)");
}

EvalResult cmd_eval(const Checkpoint& checkpoint, const EvalData& data, int shots, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& out) {
    const auto samples = checkpoint_samples(checkpoint, data);
    if (samples.empty()) {
        throw std::runtime_error("no samples to evaluate");
    }
    EvalResult result;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const auto state = evolve(realize(checkpoint.params, samples[s]), checkpoint.params.shape.evolution);
        double soft = predict(state);
        if (shots > 0) {
            soft = shot_estimate(sample_shots(state, shots, derive_seed(seed, {static_cast<std::uint64_t>(s)})));
        }
        result.soft_labels.push_back(soft);
        result.labels.push_back(samples[s].label);
    }
    result.metrics = evaluate_metrics(result.soft_labels, result.labels);
    if (out) {
        const json j = {{"accuracy", result.metrics.accuracy},
                        {"f1", result.metrics.f1},
                        {"n_samples", samples.size()},
                        {"shots", shots},
                        {"soft_labels", result.soft_labels},
                        {"labels", result.labels}};
        write_text(*out, j.dump(2) + "\n");
    }
    return result;
}

namespace {

double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) {
        throw std::invalid_argument("invalid " + what + " value '" + s + "'");
    }
    return v;
}

int parse_int(const std::string& s, const std::string& what) {
    const double v = parse_double(s, what);
    if (v != static_cast<double>(static_cast<int>(v))) {
        throw std::invalid_argument("invalid " + what + " value '" + s + "'");
    }
    return static_cast<int>(v);
}

}  // namespace

std::vector<SweepRow> cmd_sweep(const RunConfig& config, const std::string& axis,
                                const std::vector<std::string>& values,
                                const std::optional<std::filesystem::path>& out) {
    if (values.empty()) {
        throw std::invalid_argument("sweep needs at least one value");
    }
    std::vector<RunConfig> configs;
    for (const auto& value : values) {
        RunConfig c = config;
        if (axis == "spacing") {
            c.spacing = parse_double(value, "spacing");
            if (c.spacing < kMinAtomSpacingUm) {
                throw std::invalid_argument("spacing " + value + " um is below the hardware floor");
            }
        } else if (axis == "grid") {
            c.grid = parse_grid_config(value);
            if (c.grid == GridConfig::custom) {
                throw std::invalid_argument("custom grids cannot be swept");
            }
        } else if (axis == "intervals") {
            c.timing.n_intervals = parse_int(value, "intervals");
            c.timing.validate();
        } else {
            throw std::invalid_argument("unknown sweep axis '" + axis + "' (expected spacing, grid or intervals)");
        }
        configs.push_back(c);
    }
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const TrainingRun run = run_training(configs[i]);
        SweepRow row;
        row.axis = axis;
        row.value = values[i];
        row.trainable_count = run.checkpoint.params.trainable_count();
        row.train_accuracy = run.checkpoint.history.final_metrics.accuracy;
        row.test_accuracy = run.test_metrics.accuracy;
        row.test_f1 = run.test_metrics.f1;
        rows.push_back(row);
    }
    if (out) {
        write_text(*out, sweep_csv(rows));
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "axis,value,trainable_count,train_accuracy,test_accuracy,test_f1\n";
    for (const auto& r : rows) {
        csv << r.axis << "," << r.value << "," << r.trainable_count << "," << r.train_accuracy << ","
            << r.test_accuracy << "," << r.test_f1 << "\n";
    }
    return csv.str();
}

std::string noise_study_json(const NoiseStudy& study) {
    json sweep = json::array();
    for (const auto& point : study.sweep) {
        sweep.push_back({{"multiplier", point.multiplier},
                         {"noise", to_json(point.report.noise)},
                         {"flip_rate", point.report.flip_rate},
                         {"member_flip_rate", point.report.member_flip_rate},
                         {"mean_abs_shift", point.report.mean_abs_shift},
                         {"ideal_accuracy", point.report.ideal_accuracy},
                         {"noisy_accuracy", point.report.noisy_accuracy},
                         {"accuracy_delta", point.report.accuracy_delta}});
    }
    const json j = {{"RobustnessReport", to_json(study.reference)},
                    {"sweep", sweep},
                    {"spearman_rho", study.spearman_rho},
                    {"spearman_p_value", study.spearman_p}};
    return j.dump(2) + "\n";
}

NoiseStudy cmd_noise(const Checkpoint& checkpoint, const EvalData& data, const NoiseSpec& noise,
                     const std::vector<double>& multipliers, int n_ensemble,
                     const std::optional<std::filesystem::path>& out) {
    const auto samples = checkpoint_samples(checkpoint, data);
    NoiseStudy study;
    study.reference = robustness_eval(checkpoint.params, samples, noise, n_ensemble);
    study.sweep = noise_sweep(checkpoint.params, samples, noise, multipliers, n_ensemble);
    if (multipliers.size() >= 2) {
        std::vector<double> shifts;
        for (const auto& p : study.sweep) {
            shifts.push_back(p.report.mean_abs_shift);
        }
        study.spearman_rho = spearman(multipliers, shifts);
        study.spearman_p = spearman_p_value(multipliers, shifts);
    }
    if (out) {
        write_text(*out, noise_study_json(study));
        std::ostringstream csv;
        csv.precision(17);
        csv << "multiplier,position_sigma,rabi_relative_sigma,detuning_sigma,flip_rate,mean_abs_shift,"
               "ideal_accuracy,noisy_accuracy\n";
        for (const auto& p : study.sweep) {
            csv << p.multiplier << "," << p.report.noise.position_sigma << "," << p.report.noise.rabi_relative_sigma
                << "," << p.report.noise.detuning_sigma << "," << p.report.flip_rate << ","
                << p.report.mean_abs_shift << "," << p.report.ideal_accuracy << "," << p.report.noisy_accuracy
                << "\n";
        }
        write_text(out->string() + ".sweep.csv", csv.str());
    }
    return study;
}

AnalogProgram checkpoint_program(const Checkpoint& checkpoint, const Eigen::VectorXd& raw_features) {
    const EncodedSample sample =
        encode(raw_features, checkpoint.pca, checkpoint.scaler, checkpoint.params.shape.n_atoms());
    return make_program(realize(checkpoint.params, sample));
}

ProgramLimits checkpoint_limits(const Checkpoint& checkpoint) {
    ProgramLimits limits;
    limits.amplitude = ChannelLimits::defaults(Channel::rabi);
    limits.detuning = checkpoint.params.shape.limits[1];
    limits.local_detuning = checkpoint.params.shape.limits[2];
    return limits;
}

std::string cmd_export(const Checkpoint& checkpoint, const Eigen::VectorXd& raw_features,
                       const std::optional<std::filesystem::path>& out) {
    const std::string text = export_program(checkpoint_program(checkpoint, raw_features), checkpoint_limits(checkpoint));
    if (out) {
        write_text(*out, text);
    }
    return text;
}

RawDataset cmd_synth(const BlobConfig& config, const std::filesystem::path& out) {
    RawDataset data = make_blobs(config);
    if (out.has_parent_path()) {
        std::filesystem::create_directories(out.parent_path());
    }
    write_csv(data, out);
    return data;
}

}  // namespace rydode
