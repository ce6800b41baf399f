#include "rydode/serialization.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rydode {

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

json limits_to_json(const ChannelLimits& l) { return json::array({l.min, l.max}); }

ChannelLimits limits_from_json(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

SlotKind slot_kind_from(std::string_view name) {
    if (name == "rabi") return SlotKind::rabi;
    if (name == "global_detuning") return SlotKind::global_detuning;
    if (name == "local_detuning") return SlotKind::local_detuning;
    if (name == "coupling") return SlotKind::coupling;
    throw std::runtime_error("unknown scaler slot kind '" + std::string(name) + "'");
}

std::string_view slot_kind_name(SlotKind kind) {
    switch (kind) {
        case SlotKind::rabi: return "rabi";
        case SlotKind::global_detuning: return "global_detuning";
        case SlotKind::local_detuning: return "local_detuning";
        case SlotKind::coupling: return "coupling";
    }
    return "coupling";
}

}  // namespace

json to_json(const AtomGrid& grid) {
    json positions = json::array();
    for (const auto& p : grid.positions) {
        positions.push_back(json::array({p.x, p.y}));
    }
    return {{"config", std::string(to_string(grid.config))}, {"spacing", grid.spacing}, {"positions", positions}};
}

AtomGrid grid_from_json(const json& j) {
    std::vector<Position> positions;
    for (const auto& p : j.at("positions")) {
        positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    return grid_from_positions(std::move(positions), parse_grid_config(j.at("config").get<std::string>()),
                               j.at("spacing").get<double>());
}

json to_json(const PulseTiming& t) {
    return {{"n_intervals", t.n_intervals},
            {"hold", t.hold},
            {"transition", t.transition},
            {"initial_ramp", t.initial_ramp}};
}

PulseTiming timing_from_json(const json& j) {
    PulseTiming t;
    t.n_intervals = j.value("n_intervals", t.n_intervals);
    t.hold = j.value("hold", t.hold);
    t.transition = j.value("transition", t.transition);
    t.initial_ramp = j.value("initial_ramp", t.initial_ramp);
    return t;
}

json to_json(const EvolutionConfig& c) { return {{"max_step_phase", c.max_step_phase}, {"dt_max", c.dt_max}}; }

EvolutionConfig evolution_from_json(const json& j) {
    EvolutionConfig c;
    c.max_step_phase = j.value("max_step_phase", c.max_step_phase);
    c.dt_max = j.value("dt_max", c.dt_max);
    return c;
}

json to_json(const TrainConfig& c) {
    return {{"iterations", c.iterations},
            {"gradient_mode", std::string(to_string(c.gradient_mode))},
            {"stochastic_samples", c.stochastic_samples},
            {"fd_step", c.fd_step},
            {"seed", c.seed},
            {"adam", {{"step", c.adam.step}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    c.iterations = j.value("iterations", c.iterations);
    if (j.contains("gradient_mode")) {
        c.gradient_mode = parse_gradient_mode(j.at("gradient_mode").get<std::string>());
    }
    c.stochastic_samples = j.value("stochastic_samples", c.stochastic_samples);
    c.fd_step = j.value("fd_step", c.fd_step);
    c.seed = j.value("seed", c.seed);
    if (j.contains("adam")) {
        const auto& a = j.at("adam");
        c.adam.step = a.value("step", c.adam.step);
        c.adam.beta1 = a.value("beta1", c.adam.beta1);
        c.adam.beta2 = a.value("beta2", c.adam.beta2);
        c.adam.epsilon = a.value("epsilon", c.adam.epsilon);
    }
    return c;
}

json to_json(const NoiseSpec& n) {
    return {{"position_sigma", n.position_sigma},
            {"rabi_relative_sigma", n.rabi_relative_sigma},
            {"detuning_sigma", n.detuning_sigma},
            {"seed", n.seed}};
}

NoiseSpec noise_from_json(const json& j, NoiseSpec n) {
    n.position_sigma = j.value("position_sigma", n.position_sigma);
    n.rabi_relative_sigma = j.value("rabi_relative_sigma", n.rabi_relative_sigma);
    n.detuning_sigma = j.value("detuning_sigma", n.detuning_sigma);
    n.seed = j.value("seed", n.seed);
    return n;
}

json to_json(const BlobConfig& b) {
    return {{"n_samples", b.n_samples},
            {"n_features", b.n_features},
            {"separation", b.separation},
            {"sigma", b.sigma},
            {"seed", b.seed}};
}

BlobConfig blobs_from_json(const json& j, BlobConfig b) {
    b.n_samples = j.value("n_samples", b.n_samples);
    b.n_features = j.value("n_features", b.n_features);
    b.separation = j.value("separation", b.separation);
    b.sigma = j.value("sigma", b.sigma);
    b.seed = j.value("seed", b.seed);
    return b;
}

json to_json(const DatasetSource& d) {
    return {{"kind", d.kind},
            {"provenance", d.provenance},
            {"path", d.path},
            {"label_column", d.label_column},
            {"images", d.images},
            {"labels", d.labels},
            {"class_a", d.class_a},
            {"class_b", d.class_b},
            {"sample_cap", d.sample_cap},
            {"blobs", to_json(d.blobs)},
            {"train_fraction", d.train_fraction},
            {"split_seed", d.split_seed},
            {"n_raw_features", d.n_raw_features}};
}

DatasetSource dataset_from_json(const json& j, DatasetSource d) {
    d.kind = j.value("kind", d.kind);
    d.provenance = j.value("provenance", d.kind == "csv" ? std::string("csv") : d.kind == "idx" ? std::string("mnist-pair") : d.provenance);
    d.path = j.value("path", d.path);
    d.label_column = j.value("label_column", d.label_column);
    d.images = j.value("images", d.images);
    d.labels = j.value("labels", d.labels);
    d.class_a = j.value("class_a", d.class_a);
    d.class_b = j.value("class_b", d.class_b);
    d.sample_cap = j.value("sample_cap", d.sample_cap);
    if (j.contains("blobs")) {
        d.blobs = blobs_from_json(j.at("blobs"), d.blobs);
    }
    d.train_fraction = j.value("train_fraction", d.train_fraction);
    d.split_seed = j.value("split_seed", d.split_seed);
    d.n_raw_features = j.value("n_raw_features", d.n_raw_features);
    return d;
}

json to_json(const Checkpoint& c) {
    const auto& p = c.params;
    json thetas = json::object();
    for (std::size_t ch = 0; ch < 3; ++ch) {
        json pairs = json::array();
        for (const auto& t : p.pulse_thetas[ch]) {
            pairs.push_back(json::array({t.scale, t.offset}));
        }
        thetas[std::string(to_string(kChannels[ch]))] = pairs;
    }
    json limits = json::object();
    for (std::size_t ch = 0; ch < 3; ++ch) {
        limits[std::string(to_string(kChannels[ch]))] = limits_to_json(p.shape.limits[ch]);
    }
    json components = json::array();
    for (Eigen::Index r = 0; r < c.pca.components.rows(); ++r) {
        components.push_back(vector_to_json(c.pca.components.row(r).transpose()));
    }
    json slots = json::array();
    for (const auto& s : c.scaler.slots) {
        slots.push_back({{"kind", std::string(slot_kind_name(s.kind))},
                         {"fit_min", s.fit_min},
                         {"fit_max", s.fit_max},
                         {"target_min", s.target_min},
                         {"target_max", s.target_max}});
    }
    return {
        {"format_version", c.format_version},
        {"AtomGrid", to_json(p.shape.grid)},
        {"PulseTiming", to_json(p.shape.timing)},
        {"ChannelLimits", limits},
        {"EvolutionConfig", to_json(p.shape.evolution)},
        {"ModelParameters", {{"pulse_thetas", thetas}, {"coupling_params", p.coupling_params}}},
        {"PCAModel",
         {{"mean", vector_to_json(c.pca.mean)},
          {"components", components},
          {"explained_variance_ratio", vector_to_json(c.pca.explained_variance_ratio)}}},
        {"FeatureScaler", {{"slots", slots}}},
        {"TrainConfig", to_json(c.train_config)},
        {"TrainHistory",
         {{"initial_loss", c.history.initial_loss},
          {"loss", c.history.loss},
          {"train_accuracy", c.history.train_accuracy},
          {"wall_time_seconds", c.history.wall_time_seconds},
          {"final_accuracy", c.history.final_metrics.accuracy},
          {"final_f1", c.history.final_metrics.f1}}},
        {"dataset", to_json(c.dataset)},
        {"seed", c.seed},
    };
}

Checkpoint checkpoint_from_json(const json& j) {
    try {
        Checkpoint c;
        c.format_version = j.at("format_version").get<int>();
        if (c.format_version != kCheckpointFormatVersion) {
            throw std::runtime_error("unsupported checkpoint format version " + std::to_string(c.format_version));
        }
        ModelShape shape;
        shape.grid = grid_from_json(j.at("AtomGrid"));
        shape.timing = timing_from_json(j.at("PulseTiming"));
        shape.evolution = evolution_from_json(j.at("EvolutionConfig"));
        for (std::size_t ch = 0; ch < 3; ++ch) {
            shape.limits[ch] = limits_from_json(j.at("ChannelLimits").at(std::string(to_string(kChannels[ch]))));
        }
        auto& p = c.params;
        p.shape = std::move(shape);
        const auto& mp = j.at("ModelParameters");
        for (std::size_t ch = 0; ch < 3; ++ch) {
            for (const auto& pair : mp.at("pulse_thetas").at(std::string(to_string(kChannels[ch])))) {
                p.pulse_thetas[ch].push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
            }
            if (p.pulse_thetas[ch].size() != static_cast<std::size_t>(p.shape.timing.n_intervals)) {
                throw std::runtime_error("theta count does not match the number of intervals");
            }
        }
        p.coupling_params = mp.at("coupling_params").get<std::vector<double>>();
        if (p.coupling_params.size() != p.shape.grid.n_atoms() / 2) {
            throw std::runtime_error("coupling parameter count does not match the register");
        }

        const auto& pca = j.at("PCAModel");
        c.pca.mean = vector_from_json(pca.at("mean"));
        const auto& rows = pca.at("components");
        c.pca.components.resize(static_cast<Eigen::Index>(rows.size()), c.pca.mean.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const Eigen::VectorXd row = vector_from_json(rows[r]);
            if (row.size() != c.pca.mean.size()) {
                throw std::runtime_error("PCA component length mismatch");
            }
            c.pca.components.row(static_cast<Eigen::Index>(r)) = row.transpose();
        }
        c.pca.explained_variance_ratio = vector_from_json(pca.at("explained_variance_ratio"));

        for (const auto& s : j.at("FeatureScaler").at("slots")) {
            ScalerSlot slot;
            slot.kind = slot_kind_from(s.at("kind").get<std::string>());
            slot.fit_min = s.at("fit_min").get<double>();
            slot.fit_max = s.at("fit_max").get<double>();
            slot.target_min = s.at("target_min").get<double>();
            slot.target_max = s.at("target_max").get<double>();
            c.scaler.slots.push_back(slot);
        }

        c.train_config = train_config_from_json(j.at("TrainConfig"));
        const auto& h = j.at("TrainHistory");
        c.history.initial_loss = h.at("initial_loss").get<double>();
        c.history.loss = h.at("loss").get<std::vector<double>>();
        c.history.train_accuracy = h.at("train_accuracy").get<std::vector<double>>();
        c.history.wall_time_seconds = h.at("wall_time_seconds").get<double>();
        c.history.final_metrics.accuracy = h.at("final_accuracy").get<double>();
        c.history.final_metrics.f1 = h.at("final_f1").get<double>();
        c.dataset = dataset_from_json(j.at("dataset"));
        c.seed = j.at("seed").get<std::uint64_t>();
        return c;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed checkpoint: ") + e.what());
    }
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) { return to_json(checkpoint).dump(2) + "\n"; }

Checkpoint parse_checkpoint(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    return checkpoint_from_json(j);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    write_text(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_text(path)); }

json to_json(const RobustnessReport& r) {
    json samples = json::array();
    for (const auto& s : r.samples) {
        samples.push_back({{"label", s.label},
                           {"ideal", s.ideal},
                           {"noisy_mean", s.noisy_mean},
                           {"noisy_std", s.noisy_std},
                           {"flip", s.flip},
                           {"member_flip_rate", s.member_flip_rate}});
    }
    return {{"noise", to_json(r.noise)},
            {"n_ensemble", r.n_ensemble},
            {"flip_rate", r.flip_rate},
            {"member_flip_rate", r.member_flip_rate},
            {"mean_abs_shift", r.mean_abs_shift},
            {"ideal_accuracy", r.ideal_accuracy},
            {"noisy_accuracy", r.noisy_accuracy},
            {"accuracy_delta", r.accuracy_delta},
            {"samples", samples}};
}

}  // namespace rydode
