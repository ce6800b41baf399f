#include "rydode/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rydode/rng.hpp"

namespace rydode {

RawDataset RawDataset::subset(const std::vector<std::size_t>& rows) const {
    RawDataset out;
    out.provenance = provenance;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
        out.labels.push_back(labels[rows[r]]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// IDX

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset, const std::filesystem::path& path) {
    if (offset + 4 > buf.size()) {
        throw std::runtime_error("truncated IDX header in " + path.string());
    }
    return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
           (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

struct IdxArray {
    std::vector<std::uint32_t> dims;
    std::size_t payload_offset = 0;
    std::vector<unsigned char> bytes;
};

IdxArray read_idx(const std::filesystem::path& path, std::size_t expected_dims) {
    IdxArray arr;
    arr.bytes = read_file(path);
    const auto& b = arr.bytes;
    if (b.size() < 4 || b[0] != 0 || b[1] != 0 || b[2] != 0x08) {
        throw std::runtime_error("bad IDX magic (expected unsigned byte payload) in " + path.string());
    }
    const std::size_t ndims = b[3];
    if (ndims != expected_dims) {
        throw std::runtime_error("IDX file " + path.string() + " has " + std::to_string(ndims) +
                                 " dimensions, expected " + std::to_string(expected_dims));
    }
    std::size_t count = 1;
    for (std::size_t d = 0; d < ndims; ++d) {
        arr.dims.push_back(read_be32(b, 4 + 4 * d, path));
        count *= arr.dims.back();
    }
    arr.payload_offset = 4 + 4 * ndims;
    if (b.size() < arr.payload_offset + count) {
        throw std::runtime_error("truncated IDX payload in " + path.string());
    }
    return arr;
}

}  // namespace

RawDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, int class_a,
                    int class_b, std::size_t sample_cap, std::uint64_t seed, std::string provenance) {
    const IdxArray img = read_idx(images, 3);
    const IdxArray lab = read_idx(labels, 1);
    const std::size_t n = img.dims[0];
    if (lab.dims[0] != n) {
        throw std::runtime_error("image and label counts differ (" + std::to_string(n) + " vs " +
                                 std::to_string(lab.dims[0]) + ")");
    }
    const std::size_t pixels = std::size_t{img.dims[1]} * img.dims[2];

    std::vector<std::size_t> keep;
    bool seen_a = false;
    bool seen_b = false;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = lab.bytes[lab.payload_offset + i];
        if (y == class_a || y == class_b) {
            keep.push_back(i);
            seen_a = seen_a || y == class_a;
            seen_b = seen_b || y == class_b;
        }
    }
    if (!seen_a || !seen_b) {
        throw std::runtime_error("class " + std::to_string(seen_a ? class_b : class_a) + " not present in " +
                                 labels.string());
    }
    if (keep.size() > sample_cap) {
        auto rng = make_rng(seed, {0x1d});
        std::shuffle(keep.begin(), keep.end(), rng);
        keep.resize(sample_cap);
        std::sort(keep.begin(), keep.end());
    }

    RawDataset out;
    out.provenance = std::move(provenance);
    out.features.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(pixels));
    out.labels.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const std::size_t base = img.payload_offset + keep[r] * pixels;
        for (std::size_t p = 0; p < pixels; ++p) {
            out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p)) = img.bytes[base + p];
        }
        out.labels.push_back(lab.bytes[lab.payload_offset + keep[r]] == class_a ? 0 : 1);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r\"");
    auto end = s.find_last_not_of(" \t\r\"");
    if (begin == std::string_view::npos) {
        return {};
    }
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

double parse_number(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": non-numeric cell '" + cell + "'");
    }
    return value;
}

}  // namespace

RawDataset load_csv(const std::filesystem::path& path, const std::string& label_column, std::string provenance) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) {
        throw std::runtime_error(path.string() + " is empty");
    }
    const auto header = split_row(line);
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) {
        throw std::runtime_error(path.string() + " has no label column '" + label_column + "'");
    }
    const auto label_index = static_cast<std::size_t>(std::distance(header.begin(), label_it));

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_row(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double v = parse_number(cells[c], path, line_no);
            if (c == label_index) {
                if (v != 0.0 && v != 1.0) {
                    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": label must be 0 or 1");
                }
                labels.push_back(static_cast<int>(v));
            } else {
                row.push_back(v);
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw std::runtime_error(path.string() + " contains no data rows");
    }

    RawDataset out;
    out.provenance = std::move(provenance);
    out.labels = std::move(labels);
    out.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return out;
}

void write_csv(const RawDataset& data, const std::filesystem::path& path, const std::string& label_column) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.precision(17);
    for (Eigen::Index c = 0; c < data.features.cols(); ++c) {
        out << "x" << c << ",";
    }
    out << label_column << "\n";
    for (Eigen::Index r = 0; r < data.features.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.features.cols(); ++c) {
            out << data.features(r, c) << ",";
        }
        out << data.labels[static_cast<std::size_t>(r)] << "\n";
    }
}

// ---------------------------------------------------------------------------
// PCA

Eigen::VectorXd PCAModel::project(const Eigen::VectorXd& raw) const {
    if (raw.size() != mean.size()) {
        throw std::invalid_argument("sample has " + std::to_string(raw.size()) + " features, PCA expects " +
                                    std::to_string(mean.size()));
    }
    return components * (raw - mean);
}

Eigen::MatrixXd PCAModel::project_all(const Eigen::MatrixXd& raw) const {
    if (raw.cols() != mean.size()) {
        throw std::invalid_argument("data has " + std::to_string(raw.cols()) + " features, PCA expects " +
                                    std::to_string(mean.size()));
    }
    return (raw.rowwise() - mean.transpose()) * components.transpose();
}

PCAModel fit_pca(const RawDataset& train, int k) {
    const Eigen::Index n = train.features.rows();
    const Eigen::Index d = train.features.cols();
    if (k < 1 || k > std::min(n, d)) {
        throw std::invalid_argument("PCA component count " + std::to_string(k) + " outside [1, " +
                                    std::to_string(std::min(n, d)) + "]");
    }
    PCAModel model;
    model.mean = train.features.colwise().mean().transpose();
    const Eigen::MatrixXd centered = train.features.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
    const double total = cov.trace();
    if (!(total > 0.0)) {
        throw std::invalid_argument("training data has zero variance");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("PCA eigendecomposition failed");
    }
    model.components.resize(k, d);
    model.explained_variance_ratio.resize(k);
    for (int c = 0; c < k; ++c) {
        // Eigenvalues come back ascending.
        const Eigen::Index src = d - 1 - c;
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0.0) {
            v = -v;
        }
        model.components.row(c) = v.transpose();
        model.explained_variance_ratio[c] = std::max(0.0, solver.eigenvalues()[src]) / total;
    }
    return model;
}

// ---------------------------------------------------------------------------
// Scaling and encoding

double ScalerSlot::apply(double raw) const {
    if (fit_max <= fit_min) {
        return 0.5 * (target_min + target_max);
    }
    if (raw <= fit_min) {
        return target_min;
    }
    if (raw >= fit_max) {
        return target_max;
    }
    const double w = (raw - fit_min) / (fit_max - fit_min);
    return target_min + w * (target_max - target_min);
}

std::pair<double, double> FeatureScaler::target_range(SlotKind kind) {
    constexpr double pi = std::numbers::pi;
    switch (kind) {
        case SlotKind::rabi:
        case SlotKind::global_detuning: return {pi / 2.0, 2.0 * pi};
        case SlotKind::local_detuning: return {-2.0 * pi, -pi / 2.0};
        case SlotKind::coupling: return {0.0, 1.0};
    }
    return {0.0, 1.0};
}

int input_count(int n_atoms) { return 3 + n_atoms / 2; }

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& projections, int n_atoms) {
    const int slots = input_count(n_atoms);
    if (projections.cols() < slots) {
        throw std::invalid_argument("need " + std::to_string(slots) + " projected features, got " +
                                    std::to_string(projections.cols()));
    }
    if (projections.rows() < 1) {
        throw std::invalid_argument("cannot fit a scaler on zero samples");
    }
    FeatureScaler scaler;
    for (int s = 0; s < slots; ++s) {
        ScalerSlot slot;
        slot.kind = s == 0 ? SlotKind::rabi : s == 1 ? SlotKind::global_detuning : s == 2 ? SlotKind::local_detuning
                                                                                          : SlotKind::coupling;
        slot.fit_min = projections.col(s).minCoeff();
        slot.fit_max = projections.col(s).maxCoeff();
        std::tie(slot.target_min, slot.target_max) = target_range(slot.kind);
        scaler.slots.push_back(slot);
    }
    return scaler;
}

EncodedSample encode(const Eigen::VectorXd& raw, const PCAModel& pca, const FeatureScaler& scaler, int n_atoms,
                     int label) {
    const int slots = input_count(n_atoms);
    if (static_cast<int>(scaler.slots.size()) != slots) {
        throw std::invalid_argument("scaler has " + std::to_string(scaler.slots.size()) + " slots, model needs " +
                                    std::to_string(slots));
    }
    if (pca.k() < slots) {
        throw std::invalid_argument("PCA provides " + std::to_string(pca.k()) + " components, model needs " +
                                    std::to_string(slots));
    }
    const Eigen::VectorXd z = pca.project(raw);
    EncodedSample out;
    out.label = label;
    for (int s = 0; s < 3; ++s) {
        out.pulse_inputs[static_cast<std::size_t>(s)] = scaler.slots[static_cast<std::size_t>(s)].apply(z[s]);
    }
    for (int s = 3; s < slots; ++s) {
        out.coupling_inputs.push_back(scaler.slots[static_cast<std::size_t>(s)].apply(z[s]));
    }
    return out;
}

std::vector<EncodedSample> encode_all(const RawDataset& data, const PCAModel& pca, const FeatureScaler& scaler,
                                      int n_atoms) {
    std::vector<EncodedSample> out;
    out.reserve(data.size());
    for (std::size_t r = 0; r < data.size(); ++r) {
        out.push_back(encode(data.features.row(static_cast<Eigen::Index>(r)).transpose(), pca, scaler, n_atoms,
                             data.labels[r]));
    }
    return out;
}

std::pair<RawDataset, RawDataset> train_test_split(const RawDataset& data, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw std::invalid_argument("split fraction must lie strictly between 0 and 1");
    }
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<std::size_t> idx;
        for (std::size_t r = 0; r < data.size(); ++r) {
            if (data.labels[r] == cls) {
                idx.push_back(r);
            }
        }
        auto rng = make_rng(seed, {0x5b, static_cast<std::uint64_t>(cls)});
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
        if (take == 0 || take == idx.size()) {
            throw std::invalid_argument("split leaves class " + std::to_string(cls) + " empty in one part");
        }
        first.insert(first.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
        second.insert(second.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
    }
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    return {data.subset(first), data.subset(second)};
}

void BlobConfig::validate() const {
    if (n_samples < 2 || n_features < 1 || !(separation >= 0.0) || !(sigma > 0.0)) {
        throw std::invalid_argument("blob config needs n_samples >= 2, n_features >= 1, separation >= 0, sigma > 0");
    }
}

RawDataset make_blobs(const BlobConfig& config) {
    config.validate();
    auto rng = make_rng(config.seed, {0xb10b});
    std::normal_distribution<double> gauss(0.0, config.sigma);
    std::vector<int> labels(static_cast<std::size_t>(config.n_samples));
    for (int i = 0; i < config.n_samples; ++i) {
        labels[static_cast<std::size_t>(i)] = i < config.n_samples / 2 ? 0 : 1;
    }
    std::shuffle(labels.begin(), labels.end(), rng);

    RawDataset out;
    out.provenance = "synthetic";
    out.labels = labels;
    out.features.resize(config.n_samples, config.n_features);
    const double half = config.separation * config.sigma / 2.0;
    for (int i = 0; i < config.n_samples; ++i) {
        for (int f = 0; f < config.n_features; ++f) {
            out.features(i, f) = gauss(rng);
        }
        out.features(i, 0) += labels[static_cast<std::size_t>(i)] == 1 ? half : -half;
    }
    return out;
}

}  // namespace rydode
