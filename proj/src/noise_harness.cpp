#include "rydode/noise_harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rydode/rng.hpp"

namespace rydode {

double forward_noisy(const ModelParameters& params, const EncodedSample& sample, const NoiseSpec& noise) {
    return predict(evolve(perturb(realize(params, sample), noise), params.shape.evolution));
}

RobustnessReport robustness_eval(const ModelParameters& params, std::span<const EncodedSample> eval_set,
                                 const NoiseSpec& noise, int n_ensemble) {
    if (eval_set.empty()) {
        throw std::invalid_argument("evaluation set is empty");
    }
    if (n_ensemble < 1) {
        throw std::invalid_argument("ensemble size must be at least 1");
    }
    noise.validate();

    RobustnessReport report;
    report.noise = noise;
    report.n_ensemble = n_ensemble;
    std::size_t ideal_correct = 0;
    std::size_t noisy_correct = 0;
    std::size_t flips = 0;
    double member_flips = 0.0;
    double shift_total = 0.0;

    for (std::size_t s = 0; s < eval_set.size(); ++s) {
        const EncodedSample& sample = eval_set[s];
        SampleRobustness row;
        row.label = sample.label;
        row.ideal = forward(params, sample);
        const int ideal_label = hard_label(row.ideal);

        std::vector<double> members;
        members.reserve(static_cast<std::size_t>(n_ensemble));
        int member_flip_count = 0;
        for (int m = 0; m < n_ensemble; ++m) {
            NoiseSpec member = noise;
            member.seed = derive_seed(noise.seed, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(m)});
            const double soft = forward_noisy(params, sample, member);
            members.push_back(soft);
            member_flip_count += hard_label(soft) != ideal_label ? 1 : 0;
        }
        // Welford update: identical members give back that value bit for bit,
        // so a zero-sigma ensemble reproduces the ideal label exactly.
        double mean = 0.0;
        double var = 0.0;
        for (std::size_t k = 0; k < members.size(); ++k) {
            const double delta = members[k] - mean;
            mean += k == 0 ? members[k] : delta / static_cast<double>(k + 1);
            var += delta * (members[k] - mean);
        }
        row.noisy_mean = mean;
        row.noisy_std = n_ensemble > 1 ? std::sqrt(var / (n_ensemble - 1)) : 0.0;
        row.flip = hard_label(mean) != ideal_label;
        row.member_flip_rate = static_cast<double>(member_flip_count) / n_ensemble;

        ideal_correct += ideal_label == sample.label ? 1 : 0;
        noisy_correct += hard_label(mean) == sample.label ? 1 : 0;
        flips += row.flip ? 1 : 0;
        member_flips += row.member_flip_rate;
        shift_total += std::abs(row.noisy_mean - row.ideal);
        report.samples.push_back(row);
    }

    const double count = static_cast<double>(eval_set.size());
    report.flip_rate = static_cast<double>(flips) / count;
    report.member_flip_rate = member_flips / count;
    report.mean_abs_shift = shift_total / count;
    report.ideal_accuracy = static_cast<double>(ideal_correct) / count;
    report.noisy_accuracy = static_cast<double>(noisy_correct) / count;
    report.accuracy_delta = report.noisy_accuracy - report.ideal_accuracy;
    return report;
}

std::vector<SweepPoint> noise_sweep(const ModelParameters& params, std::span<const EncodedSample> eval_set,
                                    const NoiseSpec& base, std::span<const double> multipliers, int n_ensemble) {
    std::vector<SweepPoint> out;
    for (double mult : multipliers) {
        out.push_back({mult, robustness_eval(params, eval_set, base.scaled(mult), n_ensemble)});
    }
    return out;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            r[order[k]] = avg;
        }
        i = j + 1;
    }
    return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        return 0.0;
    }
    return sab / std::sqrt(saa * sbb);
}

// Upper tail of Student's t via the regularized incomplete beta function.
double student_t_upper(double t, double dof) {
    const double x = dof / (dof + t * t);
    // Continued fraction for I_x(a, b), Numerical-Recipes style.
    const double a = dof / 2.0;
    const double b = 0.5;
    auto betacf = [](double aa, double bb, double xx) {
        const double tiny = 1e-300;
        double c = 1.0;
        double d = 1.0 - (aa + bb) * xx / (aa + 1.0);
        d = std::abs(d) < tiny ? tiny : d;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 300; ++m) {
            const double m2 = 2.0 * m;
            double num = m * (bb - m) * xx / ((aa + m2 - 1.0) * (aa + m2));
            d = 1.0 + num * d;
            d = std::abs(d) < tiny ? tiny : d;
            c = 1.0 + num / c;
            c = std::abs(c) < tiny ? tiny : c;
            d = 1.0 / d;
            h *= d * c;
            num = -(aa + m) * (aa + bb + m) * xx / ((aa + m2) * (aa + m2 + 1.0));
            d = 1.0 + num * d;
            d = std::abs(d) < tiny ? tiny : d;
            c = 1.0 + num / c;
            c = std::abs(c) < tiny ? tiny : c;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::abs(del - 1.0) < 1e-15) {
                break;
            }
        }
        return h;
    };
    const double front =
        std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
    double ibeta = 0.0;
    if (x < (a + 1.0) / (a + b + 2.0)) {
        ibeta = front * betacf(a, b, x) / a;
    } else {
        ibeta = 1.0 - front * betacf(b, a, 1.0 - x) / b;
    }
    const double two_sided = ibeta;
    return t > 0.0 ? 0.5 * two_sided : 1.0 - 0.5 * two_sided;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("spearman needs two equal-length series of at least 2 points");
    }
    return pearson(ranks(x), ranks(y));
}

double spearman_p_value(std::span<const double> x, std::span<const double> y) {
    const double rho = spearman(x, y);
    const std::size_t n = x.size();
    if (n <= 8) {
        const std::vector<double> rx = ranks(x);
        std::vector<double> ry = ranks(y);
        std::sort(ry.begin(), ry.end());
        std::size_t at_least = 0;
        std::size_t total = 0;
        do {
            ++total;
            at_least += pearson(rx, ry) >= rho - 1e-12 ? 1 : 0;
        } while (std::next_permutation(ry.begin(), ry.end()));
        return static_cast<double>(at_least) / static_cast<double>(total);
    }
    if (rho >= 1.0) {
        return 0.0;
    }
    const double dof = static_cast<double>(n) - 2.0;
    const double t = rho * std::sqrt(dof / (1.0 - rho * rho));
    return student_t_upper(t, dof);
}

}  // namespace rydode
