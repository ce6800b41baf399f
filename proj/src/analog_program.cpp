#include "rydode/analog_program.hpp"

#include <cmath>
#include <sstream>

namespace rydode {

namespace {

constexpr double kMetersPerMicron = 1e-6;
constexpr double kSecondsPerMicrosecond = 1e-6;
constexpr double kRadPerSecondPerRadPerMicrosecond = 1e6;
constexpr double kBoundTolerance = 1e-9;

std::string describe(const std::vector<ConstraintViolation>& violations) {
    std::ostringstream out;
    out << "export refused, " << violations.size() << " constraint violation(s):";
    for (const auto& v : violations) {
        out << "\n  " << v.field << ": " << v.detail;
    }
    return out.str();
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

void check_series(const std::string& field, const std::vector<Breakpoint>& series, const ChannelLimits& limits,
                  std::vector<ConstraintViolation>& out) {
    for (const auto& b : series) {
        if (b.value < limits.min - kBoundTolerance || b.value > limits.max + kBoundTolerance) {
            out.push_back({field, "value " + fmt(b.value) + " rad/us at t = " + fmt(b.time) + " us outside [" +
                                      fmt(limits.min) + ", " + fmt(limits.max) + "]"});
        }
    }
}

nlohmann::json time_series(const std::vector<Breakpoint>& series) {
    nlohmann::json times = nlohmann::json::array();
    nlohmann::json values = nlohmann::json::array();
    for (const auto& b : series) {
        times.push_back(b.time * kSecondsPerMicrosecond);
        values.push_back(b.value * kRadPerSecondPerRadPerMicrosecond);
    }
    return {{"times", times}, {"values", values}};
}

}  // namespace

ExportError::ExportError(std::vector<ConstraintViolation> violations)
    : std::runtime_error(describe(violations)), violations_(std::move(violations)) {}

AnalogProgram make_program(const HamiltonianSpec& spec) {
    AnalogProgram p;
    p.sites = spec.grid.positions;
    p.amplitude = spec.omega.breakpoints();
    p.detuning = spec.delta.breakpoints();
    p.local_detuning = spec.local_delta.breakpoints();
    p.phase = {{0.0, spec.phi}, {spec.duration, spec.phi}};
    p.local_pattern = spec.h;
    p.duration = spec.duration;
    return p;
}

std::vector<ConstraintViolation> validate_program(const AnalogProgram& program, const ProgramLimits& limits) {
    std::vector<ConstraintViolation> out;

    if (program.duration > limits.max_duration + kBoundTolerance) {
        out.push_back({"duration", fmt(program.duration) + " us exceeds " + fmt(limits.max_duration) + " us"});
    }
    for (const auto* series : {&program.amplitude, &program.detuning, &program.local_detuning, &program.phase}) {
        if (series->empty() || std::abs(series->back().time - program.duration) > kBoundTolerance ||
            series->front().time != 0.0) {
            out.push_back({"timing", "every time series must span [0, duration]"});
            break;
        }
    }

    check_series("amplitude", program.amplitude, limits.amplitude, out);
    if (!program.amplitude.empty()) {
        if (program.amplitude.front().value != 0.0) {
            out.push_back({"amplitude", "must start at 0, starts at " + fmt(program.amplitude.front().value) + " rad/us"});
        }
        if (program.amplitude.back().value != 0.0) {
            out.push_back({"amplitude", "must end at 0, ends at " + fmt(program.amplitude.back().value) + " rad/us"});
        }
    }
    check_series("detuning", program.detuning, limits.detuning, out);
    check_series("local_detuning", program.local_detuning, limits.local_detuning, out);

    for (std::size_t i = 0; i < program.sites.size(); ++i) {
        for (std::size_t j = i + 1; j < program.sites.size(); ++j) {
            const double d = pair_distance(program.sites[i], program.sites[j]);
            if (d < limits.min_spacing - kBoundTolerance) {
                out.push_back({"register", "atoms " + std::to_string(i) + " and " + std::to_string(j) + " are " +
                                               fmt(d) + " um apart, minimum spacing is " + fmt(limits.min_spacing) +
                                               " um"});
            }
        }
    }
    if (program.local_pattern.size() != program.sites.size()) {
        out.push_back({"local_pattern", "has " + std::to_string(program.local_pattern.size()) + " entries for " +
                                            std::to_string(program.sites.size()) + " atoms"});
    }
    for (std::size_t i = 0; i < program.local_pattern.size(); ++i) {
        const double h = program.local_pattern[i];
        if (!(h >= 0.0 && h <= 1.0)) {
            out.push_back({"local_pattern", "h[" + std::to_string(i) + "] = " + fmt(h) + " outside [0, 1]"});
        }
    }
    return out;
}

nlohmann::json program_to_json(const AnalogProgram& program) {
    nlohmann::json sites = nlohmann::json::array();
    nlohmann::json filling = nlohmann::json::array();
    for (const auto& s : program.sites) {
        sites.push_back(nlohmann::json::array({s.x * kMetersPerMicron, s.y * kMetersPerMicron}));
        filling.push_back(1);
    }
    const nlohmann::json driving = {
        {"amplitude", {{"time_series", time_series(program.amplitude)}, {"pattern", "uniform"}}},
        {"phase", {{"time_series", time_series(program.phase)}, {"pattern", "uniform"}}},
        {"detuning", {{"time_series", time_series(program.detuning)}, {"pattern", "uniform"}}},
    };
    const nlohmann::json local = {
        {"magnitude", {{"time_series", time_series(program.local_detuning)}, {"pattern", program.local_pattern}}},
    };
    return {
        {"braketSchemaHeader", {{"name", "braket.ir.ahs.program"}, {"version", "1"}}},
        {"setup", {{"ahs_register", {{"sites", sites}, {"filling", filling}}}}},
        {"hamiltonian", {{"drivingFields", nlohmann::json::array({driving})}, {"localDetuning", nlohmann::json::array({local})}}},
    };
}

std::string export_program(const AnalogProgram& program, const ProgramLimits& limits) {
    auto violations = validate_program(program, limits);
    if (!violations.empty()) {
        throw ExportError(std::move(violations));
    }
    return program_to_json(program).dump(2) + "\n";
}

}  // namespace rydode
