#include "rydode/data.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace rydode;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "rydode_data_test";
    fs::create_directories(dir);
    return dir / name;
}

void put_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

// n images of rows×cols pixels, image i filled with value (i * 7) % 256 and
// labeled labels[i].
void write_idx(const fs::path& images, const fs::path& labels, const std::vector<int>& lab, int rows, int cols,
               bool truncate = false) {
    std::ofstream im(images, std::ios::binary), lb(labels, std::ios::binary);
    const unsigned char im_magic[4] = {0, 0, 8, 3}, lb_magic[4] = {0, 0, 8, 1};
    im.write(reinterpret_cast<const char*>(im_magic), 4);
    put_be32(im, static_cast<std::uint32_t>(lab.size()));
    put_be32(im, static_cast<std::uint32_t>(rows));
    put_be32(im, static_cast<std::uint32_t>(cols));
    const std::size_t n = truncate ? lab.size() - 1 : lab.size();
    for (std::size_t i = 0; i < n; ++i)
        for (int p = 0; p < rows * cols; ++p) im.put(static_cast<char>((i * 7 + p) % 256));
    lb.write(reinterpret_cast<const char*>(lb_magic), 4);
    put_be32(lb, static_cast<std::uint32_t>(lab.size()));
    for (int l : lab) lb.put(static_cast<char>(l));
}

TEST(Idx, LoadsRequestedPairRelabeled) {
    std::vector<int> lab;
    for (int i = 0; i < 60; ++i) lab.push_back(i % 3);  // classes 0, 1, 2
    const auto im = scratch("img.idx"), lb = scratch("lab.idx");
    write_idx(im, lb, lab, 4, 5);
    const auto d = load_idx(im, lb, 2, 1, 1000, 3);
    EXPECT_EQ(d.size(), 40u);  // cap larger than available
    EXPECT_EQ(d.n_features(), 20u);
    int ones = 0;
    for (int l : d.labels) {
        EXPECT_TRUE(l == 0 || l == 1);
        ones += l;
    }
    EXPECT_EQ(ones, 20);
    // class_a (2) maps to 0: image index ≡ 2 (mod 3) has first pixel (7i) % 256.
    for (std::size_t r = 0; r < d.size(); ++r) {
        const int first = static_cast<int>(d.features(r, 0));
        bool matched = false;
        for (int i = 0; i < 60; ++i)
            if ((i * 7) % 256 == first && lab[i] == (d.labels[r] == 0 ? 2 : 1)) matched = true;
        EXPECT_TRUE(matched);
    }
}

TEST(Idx, CapSubsamplesDeterministically) {
    std::vector<int> lab;
    for (int i = 0; i < 200; ++i) lab.push_back(i % 2);
    const auto im = scratch("img2.idx"), lb = scratch("lab2.idx");
    write_idx(im, lb, lab, 2, 2);
    const auto a = load_idx(im, lb, 0, 1, 50, 9), b = load_idx(im, lb, 0, 1, 50, 9);
    EXPECT_EQ(a.size(), 50u);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.labels, b.labels);
}

TEST(Idx, Errors) {
    std::vector<int> lab = {0, 1, 0, 1};
    const auto im = scratch("img3.idx"), lb = scratch("lab3.idx");
    write_idx(im, lb, lab, 2, 2);
    EXPECT_THROW(load_idx(im, lb, 0, 10, 100, 1), std::runtime_error);
    write_idx(im, lb, lab, 2, 2, true);
    EXPECT_THROW(load_idx(im, lb, 0, 1, 100, 1), std::runtime_error);
    {
        std::ofstream bad(im, std::ios::binary);
        bad << "PK\x03\x04garbage-not-idx";
    }
    EXPECT_THROW(load_idx(im, lb, 0, 1, 100, 1), std::runtime_error);
}

TEST(Csv, LoadsAndRoundTrips) {
    const auto p = scratch("a.csv");
    {
        std::ofstream out(p);
        out << "a,Outcome,b\n1.5,1,2\n-3,0,4e2\n";
    }
    const auto d = load_csv(p, "Outcome");
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.n_features(), 2u);
    EXPECT_DOUBLE_EQ(d.features(1, 1), 400.0);
    EXPECT_EQ(d.labels, (std::vector<int>{1, 0}));
    const auto q = scratch("b.csv");
    write_csv(d, q);
    const auto e = load_csv(q, "label");
    EXPECT_EQ(e.features, d.features);
    EXPECT_EQ(e.labels, d.labels);
}

TEST(Csv, Errors) {
    const auto p = scratch("bad.csv");
    { std::ofstream out(p); }
    EXPECT_THROW(load_csv(p, "label"), std::runtime_error);
    {
        std::ofstream out(p);
        out << "x,label\n1,0\nabc,1\n";
    }
    EXPECT_THROW(load_csv(p, "label"), std::runtime_error);
    EXPECT_THROW(load_csv(p, "Outcome"), std::runtime_error);
    {
        std::ofstream out(p);
        out << "x,label\n1,2\n";
    }
    EXPECT_THROW(load_csv(p, "label"), std::runtime_error);
}

RawDataset random_data(int n, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    RawDataset r;
    r.features.resize(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) r.features(i, j) = g(rng) * (d - j);
        r.labels.push_back(i % 2);
    }
    return r;
}

TEST(Pca, RankOneLine) {
    RawDataset r;
    r.features.resize(5, 2);
    for (int i = 0; i < 5; ++i) r.features.row(i) << i, 2.0 * i;
    r.labels = {0, 1, 0, 1, 0};
    const auto pca = fit_pca(r, 1);
    EXPECT_NEAR(pca.explained_variance_ratio(0), 1.0, 1e-12);
    EXPECT_NEAR(pca.components(0, 0), 1 / std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(pca.components(0, 1), 2 / std::sqrt(5.0), 1e-12);
}

TEST(Pca, OrthonormalOrderedCompleteAndReconstructs) {
    const auto r = random_data(60, 6, 2);
    const auto pca = fit_pca(r, 6);
    const Eigen::MatrixXd gram = pca.components * pca.components.transpose();
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(pca.explained_variance_ratio.sum(), 1.0, 1e-8);
    for (int k = 1; k < 6; ++k) EXPECT_LE(pca.explained_variance_ratio(k), pca.explained_variance_ratio(k - 1));
    const Eigen::MatrixXd centered = r.features.rowwise() - pca.mean.transpose();
    const Eigen::MatrixXd back = pca.project_all(r.features) * pca.components;
    EXPECT_LT((back - centered).cwiseAbs().maxCoeff(), 1e-6);
    for (int k = 0; k < 6; ++k) {
        Eigen::Index idx;
        pca.components.row(k).cwiseAbs().maxCoeff(&idx);
        EXPECT_GT(pca.components(k, idx), 0.0);
    }
}

TEST(Pca, KnownComponentOrder) {
    // Column j has standard deviation 6 − j, so component k is axis k.
    const auto r = random_data(2000, 6, 4);
    const auto pca = fit_pca(r, 5);
    EXPECT_EQ(pca.k(), 5);
    for (int k = 0; k < 5; ++k) EXPECT_GT(std::abs(pca.components(k, k)), 0.95);
}

TEST(Pca, Errors) {
    const auto r = random_data(10, 3, 1);
    EXPECT_THROW(fit_pca(r, 4), std::invalid_argument);
    EXPECT_THROW(fit_pca(r, 0), std::invalid_argument);
    RawDataset flat;
    flat.features = Eigen::MatrixXd::Constant(5, 2, 3.0);
    flat.labels = {0, 1, 0, 1, 0};
    EXPECT_THROW(fit_pca(flat, 1), std::invalid_argument);
}

TEST(Scaler, AffineMapAndEndpoints) {
    const ScalerSlot slot{SlotKind::rabi, -2.0, 6.0, std::numbers::pi / 2, 2 * std::numbers::pi};
    EXPECT_NEAR(slot.apply(0.0), 2.7489, 1e-4);
    EXPECT_EQ(slot.apply(-2.0), std::numbers::pi / 2);
    EXPECT_EQ(slot.apply(6.0), 2 * std::numbers::pi);
    EXPECT_EQ(slot.apply(-100.0), std::numbers::pi / 2);
    EXPECT_EQ(slot.apply(100.0), 2 * std::numbers::pi);
    const auto [lo, hi] = FeatureScaler::target_range(SlotKind::local_detuning);
    const ScalerSlot d{SlotKind::local_detuning, -2.0, 6.0, lo, hi};
    EXPECT_EQ(d.apply(-2.0), -2 * std::numbers::pi);
    EXPECT_EQ(FeatureScaler::target_range(SlotKind::coupling), (std::pair<double, double>{0.0, 1.0}));
}

TEST(Encode, SlotAssignmentRangesAndMonotonicity) {
    const auto r = random_data(300, 8, 6);
    const int n_atoms = 4;
    ASSERT_EQ(input_count(n_atoms), 5);
    const auto pca = fit_pca(r, input_count(n_atoms));
    const auto scaler = FeatureScaler::fit(pca.project_all(r.features), n_atoms);
    ASSERT_EQ(scaler.slots.size(), 5u);
    EXPECT_EQ(scaler.slots[0].kind, SlotKind::rabi);
    EXPECT_EQ(scaler.slots[1].kind, SlotKind::global_detuning);
    EXPECT_EQ(scaler.slots[2].kind, SlotKind::local_detuning);
    EXPECT_EQ(scaler.slots[3].kind, SlotKind::coupling);
    EXPECT_EQ(scaler.slots[4].kind, SlotKind::coupling);

    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 40.0);  // far outside the fitted range
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::VectorXd x(8);
        for (int j = 0; j < 8; ++j) x(j) = g(rng);
        const auto e = encode(x, pca, scaler, n_atoms);
        const double pi = std::numbers::pi;
        EXPECT_GE(e.pulse_inputs[0], pi / 2);
        EXPECT_LE(e.pulse_inputs[0], 2 * pi);
        EXPECT_GE(e.pulse_inputs[1], pi / 2);
        EXPECT_LE(e.pulse_inputs[1], 2 * pi);
        EXPECT_GE(e.pulse_inputs[2], -2 * pi);
        EXPECT_LE(e.pulse_inputs[2], -pi / 2);
        ASSERT_EQ(e.coupling_inputs.size(), 2u);
        for (double h : e.coupling_inputs) {
            EXPECT_GE(h, 0.0);
            EXPECT_LE(h, 1.0);
        }
    }
    for (const auto& slot : scaler.slots)
        for (double v = -20; v < 20; v += 0.25) EXPECT_LE(slot.apply(v), slot.apply(v + 0.25));
}

TEST(Encode, DimensionMismatch) {
    const auto r = random_data(50, 5, 1);
    const auto pca = fit_pca(r, 4);
    const auto scaler = FeatureScaler::fit(pca.project_all(r.features), 2);
    EXPECT_THROW(encode(Eigen::VectorXd::Zero(6), pca, scaler, 2), std::invalid_argument);
    EXPECT_THROW(encode(Eigen::VectorXd::Zero(5), pca, scaler, 4), std::invalid_argument);
}

TEST(Split, StratifiedDisjointDeterministic) {
    auto r = random_data(100, 3, 3);
    const auto [a, b] = train_test_split(r, 0.8, 5);
    EXPECT_EQ(a.size(), 80u);
    EXPECT_EQ(b.size(), 20u);
    for (const auto* part : {&a, &b}) {
        int ones = 0;
        for (int l : part->labels) ones += l;
        EXPECT_GT(ones, 0);
        EXPECT_LT(ones, static_cast<int>(part->size()));
    }
    // Disjoint and exhaustive: every original row appears exactly once.
    std::vector<int> seen(100, 0);
    for (const auto* part : {&a, &b})
        for (Eigen::Index i = 0; i < part->features.rows(); ++i)
            for (int j = 0; j < 100; ++j)
                if (r.features.row(j) == part->features.row(i)) ++seen[j];
    for (int c : seen) EXPECT_EQ(c, 1);
    const auto [a2, b2] = train_test_split(r, 0.8, 5);
    EXPECT_EQ(a.features, a2.features);
    EXPECT_THROW(train_test_split(r, 1.0, 5), std::invalid_argument);
    EXPECT_THROW(train_test_split(r, 0.0, 5), std::invalid_argument);
}

TEST(Blobs, ShapeBalanceAndSeparation) {
    BlobConfig c;
    c.n_samples = 200;
    c.seed = 12;
    const auto d = make_blobs(c);
    EXPECT_EQ(d.size(), 200u);
    EXPECT_EQ(d.n_features(), 5u);
    int ones = 0;
    for (int l : d.labels) ones += l;
    EXPECT_EQ(ones, 100);
    // Separated along feature 0 by 4 sigma: threshold at the midpoint.
    int correct = 0;
    double m0 = 0, m1 = 0;
    for (int i = 0; i < 200; ++i) (d.labels[i] ? m1 : m0) += d.features(i, 0) / 100;
    const double mid = (m0 + m1) / 2, sign = m1 > m0 ? 1 : -1;
    for (int i = 0; i < 200; ++i) correct += ((sign * (d.features(i, 0) - mid) > 0) == (d.labels[i] == 1));
    EXPECT_GE(correct, 190);
    EXPECT_EQ(make_blobs(c).features, d.features);
    c.separation = 0.0;
    EXPECT_NO_THROW(make_blobs(c));
    c.n_samples = 0;
    EXPECT_THROW(make_blobs(c), std::invalid_argument);
}

}  // namespace
