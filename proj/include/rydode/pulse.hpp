#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rydode {

// Longest program the device accepts (µs).
inline constexpr double kMaxDurationUs = 4.0;

enum class Channel { rabi, global_detuning, local_detuning };

std::string_view to_string(Channel channel);
Channel parse_channel(std::string_view name);

struct PulseTiming {
    int n_intervals = 3;
    double hold = 0.15;          // µs
    double transition = 0.05;    // µs
    double initial_ramp = 0.05;  // µs

    double total_duration() const { return initial_ramp + n_intervals * (hold + transition); }

    // Throws std::invalid_argument for M < 1, non-positive segment lengths, or
    // a total duration above kMaxDurationUs.
    void validate() const;
};

struct ChannelLimits {
    double min = 0.0;  // rad/µs
    double max = 0.0;  // rad/µs

    static ChannelLimits defaults(Channel channel);
    double clamp(double value) const;
};

struct Breakpoint {
    double time = 0.0;   // µs
    double value = 0.0;  // rad/µs
};

struct ThetaPair {
    double scale = 1.0;
    double offset = 1.0;
};

struct ClampWarning {
    int interval = 0;
    double requested = 0.0;
    double applied = 0.0;
};

// Value held during one interval: scale·omega + offset.
double hold_value(double theta_scale, double theta_offset, double omega);

// Piecewise-linear control waveform for one channel.
//
// Schedules built from parameters also remember which hold interval each
// breakpoint value came from, which is what the gradient code needs to map a
// change in a hold value onto the waveform.
class PulseSchedule {
public:
    PulseSchedule() = default;

    // Explicit waveform, mainly for physics tests. Times must start at 0 and be
    // non-decreasing.
    static PulseSchedule from_breakpoints(Channel channel, std::vector<Breakpoint> breakpoints,
                                          ChannelLimits limits);
    static PulseSchedule constant(Channel channel, double value, double duration);

    Channel channel() const { return channel_; }
    const ChannelLimits& limits() const { return limits_; }
    const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& hold_values() const { return hold_values_; }
    const std::vector<bool>& hold_clamped() const { return hold_clamped_; }
    const std::vector<ClampWarning>& warnings() const { return warnings_; }
    bool parameterized() const { return !hold_values_.empty(); }

    double duration() const { return breakpoints_.back().time; }

    // Throws std::out_of_range outside [0, duration].
    double sample(double t) const;

    // d(value at t)/d(hold value k): the piecewise-linear hat of interval k.
    double hold_sensitivity(int interval, double t) const;

    // Copy with the breakpoint values replaced (same times and hold mapping).
    PulseSchedule with_values(std::span<const double> values) const;

private:
    friend PulseSchedule build_schedule(Channel, std::span<const ThetaPair>, double, const PulseTiming&,
                                        const ChannelLimits&);

    Channel channel_ = Channel::rabi;
    ChannelLimits limits_{};
    std::vector<Breakpoint> breakpoints_;
    // Source hold index for each breakpoint value, -1 for pinned values.
    std::vector<int> breakpoint_source_;
    std::vector<double> hold_values_;
    std::vector<bool> hold_clamped_;
    std::vector<ClampWarning> warnings_;
};

// Builds the ramp / hold / transition waveform.
//
//   [0, initial_ramp]       start value -> hold 0 (start is 0 for rabi, hold 0 otherwise)
//   hold k                  constant clamp(scale_k·omega + offset_k)
//   transition k -> k+1     linear
//   final transition        rabi returns to 0, detunings keep the last hold
//
// Throws std::invalid_argument when thetas.size() != M or timing is invalid.
PulseSchedule build_schedule(Channel channel, std::span<const ThetaPair> thetas, double omega,
                             const PulseTiming& timing, const ChannelLimits& limits);

inline double sample(const PulseSchedule& schedule, double t) { return schedule.sample(t); }

}  // namespace rydode
