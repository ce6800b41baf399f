#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rydode/commands.hpp"

using namespace rydode;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> grid;
    std::optional<double> spacing;
    std::optional<int> intervals;
    std::optional<int> atoms;
    std::optional<std::string> gradient_mode;
    std::optional<int> iterations;
    std::optional<std::string> data;
    std::optional<std::string> label_column;
};

void add_model_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--seed", f.seed, "Seed for split, blobs, training and noise");
    cmd->add_option("--grid", f.grid, "chain | ring | square | triangle");
    cmd->add_option("--spacing", f.spacing, "Atom spacing in um");
    cmd->add_option("--intervals", f.intervals, "Hold intervals per channel");
    cmd->add_option("--atoms", f.atoms, "Number of atoms");
    cmd->add_option("--gradient-mode", f.gradient_mode, "fd | stochastic");
    cmd->add_option("--iterations", f.iterations, "Training iterations");
    cmd->add_option("--data", f.data, "CSV dataset (overrides the configured source)");
    cmd->add_option("--label-column", f.label_column, "Label column of the CSV dataset");
}

RunConfig resolve_config(const CommonFlags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    if (f.seed) c.set_seed(*f.seed);
    if (f.grid) c.grid = parse_grid_config(*f.grid);
    if (f.spacing) c.spacing = *f.spacing;
    if (f.intervals) c.timing.n_intervals = *f.intervals;
    if (f.atoms) c.atoms = *f.atoms;
    if (f.gradient_mode) c.training.gradient_mode = parse_gradient_mode(*f.gradient_mode);
    if (f.iterations) c.training.iterations = *f.iterations;
    if (f.data) {
        c.dataset.kind = "csv";
        c.dataset.provenance = "csv";
        c.dataset.path = *f.data;
    }
    if (f.label_column) c.dataset.label_column = *f.label_column;
    c.timing.validate();
    c.training.validate();
    return c;
}

Eigen::VectorXd parse_features(const std::string& text) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find(',', pos);
        const std::string cell = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        std::size_t used = 0;
        try {
            values.push_back(std::stod(cell, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) {
            throw std::invalid_argument("invalid feature value '" + cell + "'");
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Analog neutral-atom binary classifier"};
    app.require_subcommand(1);

    CommonFlags train_flags;
    std::string train_out = "model.json";
    auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
    add_model_flags(train_cmd, train_flags);
    train_cmd->add_option("--out", train_out, "Checkpoint path");

    std::string eval_ckpt, eval_split = "test", eval_label;
    std::optional<std::string> eval_data, eval_out;
    int eval_shots = 0;
    std::uint64_t eval_seed = 0;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval_cmd->add_option("checkpoint", eval_ckpt, "Checkpoint path")->required();
    eval_cmd->add_option("--data", eval_data, "CSV to evaluate (all rows)");
    eval_cmd->add_option("--label-column", eval_label, "Label column of --data");
    eval_cmd->add_option("--split", eval_split, "train | test | all of the checkpoint's dataset");
    eval_cmd->add_option("--shots", eval_shots, "Estimate soft labels from this many shots");
    eval_cmd->add_option("--seed", eval_seed, "Shot sampling seed");
    eval_cmd->add_option("--out", eval_out, "Metrics JSON path");

    CommonFlags sweep_flags;
    std::string sweep_axis;
    std::vector<std::string> sweep_values;
    std::optional<std::string> sweep_out;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train one model per axis value");
    add_model_flags(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--axis", sweep_axis, "spacing | grid | intervals")->required();
    sweep_cmd->add_option("--values", sweep_values, "Values to sweep")->required()->delimiter(',');
    sweep_cmd->add_option("--out", sweep_out, "CSV path");

    std::string noise_ckpt, noise_config, noise_split = "test", noise_label;
    std::optional<std::string> noise_data, noise_out;
    std::optional<std::uint64_t> noise_seed;
    std::optional<int> noise_ensemble;
    std::vector<double> noise_multipliers;
    auto* noise_cmd = app.add_subcommand("noise", "Robustness of a checkpoint under hardware noise");
    noise_cmd->add_option("checkpoint", noise_ckpt, "Checkpoint path")->required();
    noise_cmd->add_option("--config", noise_config, "JSON run configuration (noise section)");
    noise_cmd->add_option("--data", noise_data, "CSV to evaluate (all rows)");
    noise_cmd->add_option("--label-column", noise_label, "Label column of --data");
    noise_cmd->add_option("--split", noise_split, "train | test | all");
    noise_cmd->add_option("--seed", noise_seed, "Noise seed");
    noise_cmd->add_option("--ensemble", noise_ensemble, "Noisy realizations per sample");
    noise_cmd->add_option("--multipliers", noise_multipliers, "Sigma multipliers")->delimiter(',');
    noise_cmd->add_option("--out", noise_out, "Report JSON path");

    std::string export_ckpt, export_split = "test", export_label;
    std::optional<std::string> export_features, export_data, export_out;
    std::size_t export_row = 0;
    auto* export_cmd = app.add_subcommand("export", "Write a hardware program for one sample");
    export_cmd->add_option("checkpoint", export_ckpt, "Checkpoint path")->required();
    export_cmd->add_option("--features", export_features, "Comma-separated raw feature vector");
    export_cmd->add_option("--data", export_data, "CSV to take the sample from");
    export_cmd->add_option("--label-column", export_label, "Label column of --data");
    export_cmd->add_option("--row", export_row, "Row of --data (or of the checkpoint's dataset)");
    export_cmd->add_option("--out", export_out, "Program JSON path");

    BlobConfig blobs;
    std::string synth_out = "blobs.csv";
    auto* synth_cmd = app.add_subcommand("synth", "Write a two-blob synthetic dataset");
    synth_cmd->add_option("--samples", blobs.n_samples, "Number of samples");
    synth_cmd->add_option("--features", blobs.n_features, "Number of features");
    synth_cmd->add_option("--separation", blobs.separation, "Center distance in sigmas");
    synth_cmd->add_option("--seed", blobs.seed, "Seed");
    synth_cmd->add_option("--out", synth_out, "CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            const RunConfig config = resolve_config(train_flags);
            const TrainingRun run = cmd_train(config, train_out);
            std::cout << "trainable parameters " << run.checkpoint.params.trainable_count() << "\n"
                      << "final train loss " << run.checkpoint.history.loss.back() << "\n"
                      << "train accuracy " << run.checkpoint.history.final_metrics.accuracy << "\n"
                      << "test accuracy " << run.test_metrics.accuracy << "\n"
                      << "test f1 " << run.test_metrics.f1 << "\n"
                      << "checkpoint " << train_out << "\n";
        } else if (*eval_cmd) {
            const Checkpoint ckpt = load_checkpoint(eval_ckpt);
            const EvalData data{eval_data, eval_label, eval_split};
            std::optional<std::filesystem::path> out;
            if (eval_out) out = *eval_out;
            const EvalResult result = cmd_eval(ckpt, data, eval_shots, eval_seed, out);
            std::cout << "samples " << result.labels.size() << "\n"
                      << "accuracy " << result.metrics.accuracy << "\n"
                      << "f1 " << result.metrics.f1 << "\n";
        } else if (*sweep_cmd) {
            const RunConfig config = resolve_config(sweep_flags);
            std::optional<std::filesystem::path> out;
            if (sweep_out) out = *sweep_out;
            std::cout << sweep_csv(cmd_sweep(config, sweep_axis, sweep_values, out));
        } else if (*noise_cmd) {
            const Checkpoint ckpt = load_checkpoint(noise_ckpt);
            RunConfig config = noise_config.empty() ? RunConfig{} : load_run_config(noise_config);
            if (noise_config.empty()) config.set_seed(ckpt.seed);
            if (noise_seed) config.noise.seed = *noise_seed;
            if (noise_ensemble) config.n_ensemble = *noise_ensemble;
            if (!noise_multipliers.empty()) config.sigma_multipliers = noise_multipliers;
            std::optional<std::filesystem::path> out;
            if (noise_out) out = *noise_out;
            const NoiseStudy study = cmd_noise(ckpt, EvalData{noise_data, noise_label, noise_split}, config.noise,
                                               config.sigma_multipliers, config.n_ensemble, out);
            const auto& r = study.reference;
            std::cout << "flip rate " << r.flip_rate << "\n"
                      << "mean |shift| " << r.mean_abs_shift << "\n"
                      << "ideal accuracy " << r.ideal_accuracy << "\n"
                      << "noisy accuracy " << r.noisy_accuracy << "\n"
                      << "spearman rho " << study.spearman_rho << " p " << study.spearman_p << "\n";
        } else if (*export_cmd) {
            const Checkpoint ckpt = load_checkpoint(export_ckpt);
            Eigen::VectorXd features;
            if (export_features) {
                features = parse_features(*export_features);
            } else {
                RawDataset raw;
                if (export_data) {
                    raw = load_csv(resolve_data_path(*export_data),
                                   export_label.empty() ? ckpt.dataset.label_column : export_label);
                } else {
                    raw = load_dataset(ckpt.dataset);
                }
                if (export_row >= raw.size()) {
                    throw std::out_of_range("row " + std::to_string(export_row) + " out of range, dataset has " +
                                            std::to_string(raw.size()) + " rows");
                }
                features = raw.features.row(static_cast<Eigen::Index>(export_row)).transpose();
            }
            std::optional<std::filesystem::path> out;
            if (export_out) out = *export_out;
            const std::string text = cmd_export(ckpt, features, out);
            if (!export_out) std::cout << text;
        } else if (*synth_cmd) {
            const RawDataset data = cmd_synth(blobs, synth_out);
            std::cout << "wrote " << data.size() << " samples to " << synth_out << "\n";
        }
    } catch (const ExportError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
