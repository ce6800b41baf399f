// Acceptance gate. Prints one PASS / FAIL / SKIP line per criterion.
//
//   acceptance                 all criteria
//   acceptance --only A1,A7    a subset
//   acceptance --skip A7       everything else
//
// Exit status: 0 when every selected criterion passed, 77 when nothing failed
// but something was skipped, 1 otherwise.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "rydode/commands.hpp"
#include "rydode/rng.hpp"
#include "../support/reference_instance.hpp"

using namespace rydode;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
    Verdict verdict = Verdict::fail;
    std::string detail;
};

std::string num(double v, int precision = 6) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

HamiltonianSpec constant_spec(const AtomGrid& grid, double omega, double delta, double T) {
    return assemble(grid, PulseSchedule::constant(Channel::rabi, omega, T),
                    PulseSchedule::constant(Channel::global_detuning, delta, T),
                    PulseSchedule::constant(Channel::local_detuning, 0.0, T), std::vector<double>(grid.n_atoms(), 0.0));
}

constexpr std::uint64_t kSeed = 7;

RunConfig blob_config(GridConfig grid) {
    RunConfig c;
    c.set_seed(kSeed);
    c.dataset.kind = "synthetic";
    c.dataset.blobs.n_samples = 250;  // 200 train / 50 test
    c.dataset.train_fraction = 0.8;
    c.grid = grid;
    c.atoms = 4;
    c.spacing = 12.0;
    c.timing.n_intervals = 3;
    c.training.iterations = 75;
    c.training.gradient_mode = GradientMode::finite_difference;
    return c;
}

// Trained once, shared by A6, A9, A10 and A11.
struct Runs {
    std::optional<TrainingRun> square;
    double square_seconds = 0.0;
    std::optional<TrainingRun> ring;
    double ring_seconds = 0.0;
    std::optional<TrainingRun> pid;

    const TrainingRun& get_square() {
        if (!square) {
            const auto t0 = std::chrono::steady_clock::now();
            square = run_training(blob_config(GridConfig::square));
            square_seconds = seconds_since(t0);
        }
        return *square;
    }
    const TrainingRun& get_ring() {
        if (!ring) {
            const auto t0 = std::chrono::steady_clock::now();
            ring = run_training(blob_config(GridConfig::ring));
            ring_seconds = seconds_since(t0);
        }
        return *ring;
    }
};

Outcome a1(Runs&) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = evolve(constant_spec(build_grid(GridConfig::chain, 1, 10.0), 15.8, 0.0, 0.2));
    const double p = rydberg_probabilities(s)[0];
    const double expected = std::pow(std::sin(15.8 * 0.2 / 2), 2);
    const double err = std::abs(p - expected), secs = seconds_since(t0);
    return {err < 1e-4 && secs < 1.0 ? Verdict::pass : Verdict::fail,
            "P1=" + num(p, 8) + " expected " + num(expected, 8) + " |err|=" + num(err, 3) + " (<1e-4), " +
                num(secs, 3) + " s (<1 s)"};
}

Outcome a2(Runs&) {
    const auto t0 = std::chrono::steady_clock::now();
    const double omega = 2.0, delta = 2.0, T = 3.0;
    const auto spec = constant_spec(build_grid(GridConfig::chain, 1, 10.0), omega, delta, T);
    const Propagator prop(spec);
    auto state = QuantumState::ground(1);
    double worst = 0.0, t_prev = 0.0;
    const double w2 = omega * omega + delta * delta;
    for (int k = 0; k < 50; ++k) {
        const double t = T * k / 49.0;
        prop.advance(state, t_prev, t);
        t_prev = t;
        const double expected = omega * omega / w2 * std::pow(std::sin(std::sqrt(w2) * t / 2), 2);
        worst = std::max(worst, std::abs(rydberg_probabilities(state)[0] - expected));
    }
    const double secs = seconds_since(t0);
    return {worst < 1e-4 && secs < 5.0 ? Verdict::pass : Verdict::fail,
            "max deviation " + num(worst, 3) + " over 50 points (<1e-4), " + num(secs, 3) + " s (<5 s)"};
}

Outcome a3(Runs&) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto spec = realize(fixture::reference_params(), fixture::reference_sample());
    const auto coarse = evolve(spec);
    // On this instance dt_max is the binding step limit, so halving
    // max_step_phase alone leaves the step grid unchanged. Both are reported.
    EvolutionConfig phase_halved;
    phase_halved.max_step_phase /= 2;
    EvolutionConfig step_halved = phase_halved;
    step_halved.dt_max /= 2;
    const double norm_err = std::abs(coarse.norm_squared() - 1.0);
    const double diff_phase = (coarse.amplitudes - evolve(spec, phase_halved).amplitudes).norm();
    const double diff_step = (coarse.amplitudes - evolve(spec, step_halved).amplitudes).norm();
    const double secs = seconds_since(t0);
    const bool ok = norm_err < 1e-6 && diff_phase < 1e-5 && diff_step < 1e-5 && secs < 10.0 &&
                    std::abs(spec.duration - 0.65) < 1e-12;
    return {ok ? Verdict::pass : Verdict::fail,
            "| |psi|^2-1 |=" + num(norm_err, 3) + " (<1e-6), halving max_step_phase changes state by " +
                num(diff_phase, 3) + ", halving max_step_phase and dt_max by " + num(diff_step, 3) +
                " (<1e-5), T=" + num(spec.duration) + " us, " + num(secs, 3) + " s (<10 s)"};
}

Outcome a4(Runs&) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto spec = constant_spec(build_grid(GridConfig::chain, 2, 4.0), 15.8, 0.0, 0.2);
    double worst = 0.0;
    int steps = 0;
    const StepObserver obs = [&](double, const QuantumState& s) {
        worst = std::max(worst, std::norm(s.amplitudes(3)));
        ++steps;
    };
    evolve(spec, {}, obs);
    const double secs = seconds_since(t0);
    return {worst < 0.01 && steps > 0 && secs < 5.0 ? Verdict::pass : Verdict::fail,
            "max P(|11>)=" + num(worst, 3) + " over " + std::to_string(steps) + " steps (<0.01), " + num(secs, 3) +
                " s (<5 s)"};
}

Outcome a5(Runs&) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto params = fixture::reference_params();
    const std::vector<EncodedSample> batch = {fixture::reference_sample()};
    const auto fd = grad_fd(params, batch, 1e-3);
    const auto fd_half = grad_fd(params, batch, 5e-4);
    const int estimates = 2000, draws = 20;
    const std::size_t n = fd.size();
    std::vector<double> sum(n, 0.0), sq(n, 0.0);
    for (int e = 0; e < estimates; ++e) {
        const auto g = grad_stochastic(params, batch, draws, derive_seed(kSeed, {5, static_cast<std::uint64_t>(e)}));
        for (std::size_t i = 0; i < n; ++i) sum[i] += g[i], sq[i] += g[i] * g[i];
    }
    double dot = 0, na = 0, nb = 0;
    int outside = 0;
    double worst_ratio = 0.0;
    std::ostringstream table;
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = sum[i] / estimates;
        const double var = std::max(0.0, (sq[i] - estimates * mean * mean) / (estimates - 1));
        const double se = std::sqrt(var / estimates);
        // Central differences carry O(h²) truncation error; the Richardson
        // estimate of it is added to the 3σ band.
        const double fd_err = std::abs(fd[i] - fd_half[i]) * 4.0 / 3.0;
        const double tol = 3.0 * se + fd_err;
        const double dev = std::abs(mean - fd[i]);
        if (dev > tol) ++outside;
        if (tol > 0) worst_ratio = std::max(worst_ratio, dev / (3.0 * se + fd_err));
        dot += mean * fd[i];
        na += mean * mean;
        nb += fd[i] * fd[i];
        table << "    [" << std::setw(2) << i << "] fd " << std::setw(12) << num(fd[i]) << "  mc " << std::setw(12)
              << num(mean) << "  se " << std::setw(10) << num(se, 3) << "\n";
    }
    const double cosine = dot / std::sqrt(na * nb);
    const double secs = seconds_since(t0);
    std::cout << table.str();
    return {cosine >= 0.9 && outside == 0 && secs < 1800 ? Verdict::pass : Verdict::fail,
            "cosine " + num(cosine, 5) + " (>=0.9), " + std::to_string(outside) + "/" + std::to_string(n) +
                " components outside 3 SE (worst |dev|/tol " + num(worst_ratio, 3) + "), " + num(secs, 4) +
                " s (<1800 s)"};
}

Outcome a6(Runs& runs) {
    const auto& run = runs.get_square();
    const double train_acc = run.checkpoint.history.final_metrics.accuracy;
    const double test_acc = run.test_metrics.accuracy;
    const bool sizes = run.data.train.size() == 200 && run.data.test.size() == 50;
    return {train_acc >= 0.9 && test_acc >= 0.85 && sizes && runs.square_seconds < 1800 ? Verdict::pass
                                                                                         : Verdict::fail,
            "train acc " + num(train_acc, 4) + " (>=0.9), test acc " + num(test_acc, 4) + " (>=0.85), " +
                std::to_string(run.data.train.size()) + "/" + std::to_string(run.data.test.size()) +
                " split, final loss " + num(run.checkpoint.history.loss.back(), 5) + ", " +
                num(runs.square_seconds, 4) + " s (<1800 s)"};
}

std::filesystem::path pid_path() {
    const char* dir = std::getenv(kDataDirEnv);
    if (dir == nullptr || *dir == '\0') return {};
    return std::filesystem::path(dir) / "pima-indians-diabetes.csv";
}

Outcome a7(Runs& runs) {
    const auto path = pid_path();
    if (path.empty() || !std::filesystem::exists(path)) {
        return {Verdict::skip, std::string("dataset not available: set ") + kDataDirEnv +
                                   " to a directory holding pima-indians-diabetes.csv (label column Outcome)"};
    }
    const auto t0 = std::chrono::steady_clock::now();
    RunConfig c;
    c.set_seed(kSeed);
    c.dataset.kind = "csv";
    c.dataset.provenance = "pid";
    c.dataset.path = path.string();
    c.dataset.label_column = "Outcome";
    c.dataset.train_fraction = 0.8;
    c.training.iterations = 75;
    runs.pid = run_training(c);
    const double acc = runs.pid->test_metrics.accuracy;
    const double secs = seconds_since(t0);
    const auto all = load_dataset(c.dataset);
    const double ones = std::accumulate(all.labels.begin(), all.labels.end(), 0.0);
    return {acc > 0.651 && secs < 3600 ? Verdict::pass : Verdict::fail,
            "test acc " + num(acc, 4) + " (>0.651), " + std::to_string(all.size()) + " rows, majority fraction " +
                num(std::max(ones, all.size() - ones) / all.size(), 4) + ", " + num(secs, 4) + " s (<3600 s)"};
}

Outcome a8(Runs&) {
    const auto t0 = std::chrono::steady_clock::now();
    const int cases[3][4] = {{2, 1, 7, 4}, {4, 3, 20, 5}, {8, 19, 118, 7}};
    std::string got;
    bool ok = true;
    for (const auto& c : cases) {
        ModelShape shape;
        shape.grid = build_grid(GridConfig::square, c[0], 12.0);
        shape.timing.n_intervals = c[1];
        const auto p = ModelParameters::initial(shape);
        ok &= p.trainable_count() == static_cast<std::size_t>(c[2]) && p.input_count() == static_cast<std::size_t>(c[3]) &&
              input_count(c[0]) == c[3];
        got += "(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + ")->" + std::to_string(p.trainable_count()) +
               "/" + std::to_string(p.input_count()) + " ";
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 1.0 ? Verdict::pass : Verdict::fail,
            got + "(expected 7/4, 20/5, 118/7), " + num(secs, 3) + " s (<1 s)"};
}

Outcome a9(Runs& runs) {
    const auto& sq = runs.get_square();
    const auto& ring = runs.get_ring();
    // The ring is placed with trigonometry and the square on a lattice, so
    // coordinates agree to an ulp. Metrics must match exactly; the continuous
    // quantities must agree to round-off.
    const auto& hs = sq.checkpoint.history;
    const auto& hr = ring.checkpoint.history;
    const bool same_metrics = sq.test_metrics.accuracy == ring.test_metrics.accuracy &&
                              sq.test_metrics.f1 == ring.test_metrics.f1 &&
                              hs.final_metrics.accuracy == hr.final_metrics.accuracy &&
                              hs.final_metrics.f1 == hr.final_metrics.f1 && hs.train_accuracy == hr.train_accuracy;
    double max_loss_diff = std::abs(hs.initial_loss - hr.initial_loss);
    bool same_length = hs.loss.size() == hr.loss.size();
    for (std::size_t i = 0; same_length && i < hs.loss.size(); ++i)
        max_loss_diff = std::max(max_loss_diff, std::abs(hs.loss[i] - hr.loss[i]));
    double max_pred_diff = 0.0;
    for (std::size_t i = 0; i < sq.test_predictions.size(); ++i)
        max_pred_diff = std::max(max_pred_diff, std::abs(sq.test_predictions[i] - ring.test_predictions[i]));
    const bool ok = same_metrics && same_length && max_loss_diff < 1e-9 && max_pred_diff < 1e-9;
    return {ok ? Verdict::pass : Verdict::fail,
            std::string("metrics ") + (same_metrics ? "identical" : "DIFFER") + ": square test acc/f1 " +
                num(sq.test_metrics.accuracy, 4) + "/" + num(sq.test_metrics.f1, 4) + ", ring " +
                num(ring.test_metrics.accuracy, 4) + "/" + num(ring.test_metrics.f1, 4) +
                "; max |loss diff| " + num(max_loss_diff, 3) + ", max |soft label diff| " +
                num(max_pred_diff, 3) + " (<1e-9), " + num(runs.square_seconds + runs.ring_seconds, 4) + " s"};
}

Outcome a10(Runs& runs) {
    std::vector<const TrainingRun*> sources = {&runs.get_square()};
    if (runs.pid) sources.push_back(&*runs.pid);
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t exported = 0, invalid = 0;
    for (const auto* run : sources) {
        const auto limits = checkpoint_limits(run->checkpoint);
        for (const auto* part : {&run->data.train_raw, &run->data.test_raw}) {
            for (Eigen::Index r = 0; r < part->features.rows(); ++r) {
                const auto prog = checkpoint_program(run->checkpoint, part->features.row(r).transpose());
                const bool endpoints = prog.amplitude.front().value == 0.0 && prog.amplitude.back().value == 0.0;
                if (!validate_program(prog, limits).empty() || !endpoints || prog.duration > 4.0) ++invalid;
                ++exported;
            }
        }
    }
    // Deliberately violating checkpoint: 3 µm spacing and 20 intervals (4.05 µs).
    auto bad = runs.get_square().checkpoint;
    std::vector<Position> cramped;
    for (const auto& p : bad.params.shape.grid.positions) cramped.push_back({p.x / 4.0, p.y / 4.0});
    bad.params.shape.grid = grid_from_positions(cramped, GridConfig::square, 3.0);
    bad.params.shape.timing.n_intervals = 20;
    for (auto& channel : bad.params.pulse_thetas) channel.resize(20);
    std::set<std::string> named;
    bool refused = false;
    try {
        const auto prog = checkpoint_program(bad, runs.get_square().data.test_raw.features.row(0).transpose());
        export_program(prog, checkpoint_limits(bad));
    } catch (const ExportError& e) {
        refused = true;
        for (const auto& v : e.violations()) named.insert(v.field);
    } catch (const std::exception& e) {
        // Assembly itself refuses a 4.05 µs program; retry with the spacing fault only.
        named.insert(std::string("assembly: ") + e.what());
    }
    if (!refused) {
        bad.params.shape.timing.n_intervals = 3;
        for (auto& channel : bad.params.pulse_thetas) channel.resize(3);
        try {
            const auto prog = checkpoint_program(bad, runs.get_square().data.test_raw.features.row(0).transpose());
            auto long_prog = prog;
            long_prog.duration = 4.05;
            for (auto* series : {&long_prog.amplitude, &long_prog.detuning, &long_prog.local_detuning, &long_prog.phase})
                series->back().time = 4.05;
            export_program(long_prog, checkpoint_limits(bad));
        } catch (const ExportError& e) {
            refused = true;
            for (const auto& v : e.violations()) named.insert(v.field);
        }
    }
    const double secs = seconds_since(t0);
    std::string names;
    for (const auto& n : named) names += (names.empty() ? "" : ",") + n;
    const bool ok = invalid == 0 && exported > 0 && refused && named.count("register") && named.count("duration");
    return {ok && secs < 1.0 ? Verdict::pass : Verdict::fail,
            std::to_string(exported - invalid) + "/" + std::to_string(exported) + " exported programs valid across " +
                std::to_string(sources.size()) + " checkpoint(s); violating checkpoint " +
                (refused ? "refused" : "ACCEPTED") + " naming {" + names + "}, " + num(secs, 3) + " s (<1 s)"};
}

Outcome a11(Runs& runs) {
    const auto& run = runs.get_square();
    const auto t0 = std::chrono::steady_clock::now();
    const auto& params = run.checkpoint.params;
    const auto& eval = run.data.test;
    const auto zero = robustness_eval(params, eval, NoiseSpec{0.0, 0.0, 0.0, kSeed}, 20);
    bool exact = zero.flip_rate == 0.0;
    for (std::size_t i = 0; i < eval.size(); ++i) exact &= zero.samples[i].noisy_mean == run.test_predictions[i];
    NoiseSpec noise;
    noise.seed = kSeed;
    const auto sweep = noise_sweep(params, eval, noise, kDefaultSigmaMultipliers, 20);
    std::vector<double> shifts;
    std::string curve;
    for (const auto& p : sweep) {
        shifts.push_back(p.report.mean_abs_shift);
        curve += num(p.multiplier, 2) + "x:" + num(p.report.mean_abs_shift, 3) + " ";
    }
    const double rho = spearman(kDefaultSigmaMultipliers, shifts);
    const double p = spearman_p_value(kDefaultSigmaMultipliers, shifts);
    const double secs = seconds_since(t0);
    return {exact && rho > 0 && p < 0.05 && secs < 1200 ? Verdict::pass : Verdict::fail,
            std::string("zero-sigma ensemble ") + (exact ? "reproduces" : "DIFFERS FROM") +
                " ideal soft labels (flip rate " + num(zero.flip_rate) + "); mean |shift| " + curve + "Spearman rho " +
                num(rho, 3) + " p=" + num(p, 3) + " (<0.05), " + num(secs, 4) + " s (<1200 s)"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria A1-A11"};
    std::vector<std::string> only, skip;
    app.add_option("--only", only, "Criteria to run")->delimiter(',');
    app.add_option("--skip", skip, "Criteria to leave out")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome(Runs&)>>> criteria = {
        {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},   {"A6", a6},
        {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}, {"A11", a11}};

    Runs runs;
    int failed = 0, skipped = 0;
    for (const auto& [id, fn] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        if (std::find(skip.begin(), skip.end(), id) != skip.end()) continue;
        Outcome out;
        try {
            out = fn(runs);
        } catch (const std::exception& e) {
            out = {Verdict::fail, std::string("error: ") + e.what()};
        }
        const char* tag = out.verdict == Verdict::pass ? "PASS" : out.verdict == Verdict::skip ? "SKIP" : "FAIL";
        std::cout << std::left << std::setw(4) << id << " " << tag << "  " << out.detail << std::endl;
        failed += out.verdict == Verdict::fail;
        skipped += out.verdict == Verdict::skip;
    }
    if (failed > 0) return 1;
    return skipped > 0 ? 77 : 0;
}
