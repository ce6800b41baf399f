#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rydode/hamiltonian.hpp"

namespace rydode {

// Device-facing description of one realized program, in the units used
// throughout the library (µm, µs, rad/µs).
struct AnalogProgram {
    std::vector<Position> sites;
    std::vector<Breakpoint> amplitude;       // Ω
    std::vector<Breakpoint> phase;           // φ
    std::vector<Breakpoint> detuning;        // Δ
    std::vector<Breakpoint> local_detuning;  // δ
    std::vector<double> local_pattern;       // h_i
    double duration = 0.0;
};

struct ConstraintViolation {
    std::string field;   // e.g. "amplitude", "register", "local_pattern"
    std::string detail;  // which time / atom and which bound
};

struct ProgramLimits {
    ChannelLimits amplitude{0.0, 15.8};
    ChannelLimits detuning{-125.0, 125.0};
    ChannelLimits local_detuning{-125.0, 125.0};
    double max_duration = kMaxDurationUs;
    double min_spacing = kMinAtomSpacingUm;
};

class ExportError : public std::runtime_error {
public:
    explicit ExportError(std::vector<ConstraintViolation> violations);
    const std::vector<ConstraintViolation>& violations() const { return violations_; }

private:
    std::vector<ConstraintViolation> violations_;
};

AnalogProgram make_program(const HamiltonianSpec& spec);

// Every failed hardware constraint, empty when the program is valid.
std::vector<ConstraintViolation> validate_program(const AnalogProgram& program, const ProgramLimits& limits = {});

// Analog Hamiltonian simulation IR layout (SI units: m, s, rad/s).
nlohmann::json program_to_json(const AnalogProgram& program);

// Validates, then serializes. Throws ExportError listing every violation.
std::string export_program(const AnalogProgram& program, const ProgramLimits& limits = {});

}  // namespace rydode
