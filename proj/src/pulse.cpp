#include "rydode/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rydode {

std::string_view to_string(Channel channel) {
    switch (channel) {
        case Channel::rabi: return "rabi";
        case Channel::global_detuning: return "global_detuning";
        case Channel::local_detuning: return "local_detuning";
    }
    return "rabi";
}

Channel parse_channel(std::string_view name) {
    if (name == "rabi") return Channel::rabi;
    if (name == "global_detuning") return Channel::global_detuning;
    if (name == "local_detuning") return Channel::local_detuning;
    throw std::invalid_argument("unknown channel '" + std::string(name) + "'");
}

void PulseTiming::validate() const {
    if (n_intervals < 1) {
        throw std::invalid_argument("number of pulse intervals must be >= 1, got " + std::to_string(n_intervals));
    }
    if (!(hold > 0.0) || !(transition > 0.0) || !(initial_ramp > 0.0)) {
        throw std::invalid_argument("hold, transition and initial ramp must all be positive");
    }
    // Tolerance covers the accumulated rounding in the sum.
    if (total_duration() > kMaxDurationUs + 1e-12) {
        throw std::invalid_argument("pulse duration " + std::to_string(total_duration()) + " us exceeds " +
                                    std::to_string(kMaxDurationUs) + " us");
    }
}

ChannelLimits ChannelLimits::defaults(Channel channel) {
    if (channel == Channel::rabi) {
        return {0.0, 15.8};
    }
    return {-125.0, 125.0};
}

double ChannelLimits::clamp(double value) const { return std::clamp(value, min, max); }

double hold_value(double theta_scale, double theta_offset, double omega) { return theta_scale * omega + theta_offset; }

PulseSchedule PulseSchedule::from_breakpoints(Channel channel, std::vector<Breakpoint> breakpoints,
                                              ChannelLimits limits) {
    if (breakpoints.empty()) {
        throw std::invalid_argument("a schedule needs at least one breakpoint");
    }
    if (breakpoints.front().time != 0.0) {
        throw std::invalid_argument("schedule must start at t = 0");
    }
    for (std::size_t k = 1; k < breakpoints.size(); ++k) {
        if (breakpoints[k].time < breakpoints[k - 1].time) {
            throw std::invalid_argument("breakpoint times must be non-decreasing");
        }
    }
    PulseSchedule s;
    s.channel_ = channel;
    s.limits_ = limits;
    s.breakpoint_source_.assign(breakpoints.size(), -1);
    s.breakpoints_ = std::move(breakpoints);
    return s;
}

PulseSchedule PulseSchedule::constant(Channel channel, double value, double duration) {
    if (!(duration >= 0.0)) {
        throw std::invalid_argument("duration must be non-negative");
    }
    ChannelLimits limits = ChannelLimits::defaults(channel);
    limits.min = std::min(limits.min, value);
    limits.max = std::max(limits.max, value);
    return from_breakpoints(channel, {{0.0, value}, {duration, value}}, limits);
}

namespace {

// Index k such that breakpoints[k].time <= t <= breakpoints[k+1].time.
std::size_t locate(const std::vector<Breakpoint>& bps, double t) {
    auto it = std::upper_bound(bps.begin(), bps.end(), t,
                               [](double value, const Breakpoint& b) { return value < b.time; });
    std::size_t k = static_cast<std::size_t>(std::distance(bps.begin(), it));
    if (k == 0) {
        return 0;
    }
    k -= 1;
    if (k + 1 >= bps.size()) {
        k = bps.size() >= 2 ? bps.size() - 2 : 0;
    }
    return k;
}

double interpolate(const Breakpoint& a, const Breakpoint& b, double va, double vb, double t) {
    const double span = b.time - a.time;
    if (span <= 0.0) {
        return vb;
    }
    const double w = (t - a.time) / span;
    return std::clamp((1.0 - w) * va + w * vb, std::min(va, vb), std::max(va, vb));
}

}  // namespace

double PulseSchedule::sample(double t) const {
    const double end = duration();
    if (!(t >= 0.0) || t > end * (1.0 + 1e-12) + 1e-15) {
        throw std::out_of_range("sample time " + std::to_string(t) + " outside [0, " + std::to_string(end) + "]");
    }
    if (breakpoints_.size() == 1) {
        return breakpoints_.front().value;
    }
    const std::size_t k = locate(breakpoints_, std::min(t, end));
    return interpolate(breakpoints_[k], breakpoints_[k + 1], breakpoints_[k].value, breakpoints_[k + 1].value,
                       std::min(t, end));
}

double PulseSchedule::hold_sensitivity(int interval, double t) const {
    if (breakpoints_.size() < 2) {
        return 0.0;
    }
    const double tc = std::clamp(t, 0.0, duration());
    const std::size_t k = locate(breakpoints_, tc);
    const double a = breakpoint_source_[k] == interval ? 1.0 : 0.0;
    const double b = breakpoint_source_[k + 1] == interval ? 1.0 : 0.0;
    return interpolate(breakpoints_[k], breakpoints_[k + 1], a, b, tc);
}

PulseSchedule PulseSchedule::with_values(std::span<const double> values) const {
    if (values.size() != breakpoints_.size()) {
        throw std::invalid_argument("breakpoint value count mismatch");
    }
    PulseSchedule copy = *this;
    for (std::size_t k = 0; k < values.size(); ++k) {
        copy.breakpoints_[k].value = values[k];
    }
    return copy;
}

PulseSchedule build_schedule(Channel channel, std::span<const ThetaPair> thetas, double omega,
                             const PulseTiming& timing, const ChannelLimits& limits) {
    timing.validate();
    if (thetas.size() != static_cast<std::size_t>(timing.n_intervals)) {
        throw std::invalid_argument("expected " + std::to_string(timing.n_intervals) + " theta pairs for channel " +
                                    std::string(to_string(channel)) + ", got " + std::to_string(thetas.size()));
    }
    if (!(limits.min <= limits.max)) {
        throw std::invalid_argument("channel limits have min > max");
    }

    PulseSchedule s;
    s.channel_ = channel;
    s.limits_ = limits;

    const int m = timing.n_intervals;
    s.hold_values_.reserve(static_cast<std::size_t>(m));
    s.hold_clamped_.reserve(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double raw = hold_value(thetas[k].scale, thetas[k].offset, omega);
        const double applied = limits.clamp(raw);
        s.hold_values_.push_back(applied);
        s.hold_clamped_.push_back(applied != raw);
        if (applied != raw) {
            s.warnings_.push_back({k, raw, applied});
        }
    }

    auto push = [&s](double t, double v, int source) {
        s.breakpoints_.push_back({t, v});
        s.breakpoint_source_.push_back(source);
    };

    const bool rabi = channel == Channel::rabi;
    const double interval = timing.hold + timing.transition;
    push(0.0, rabi ? limits.clamp(0.0) : s.hold_values_.front(), rabi ? -1 : 0);
    for (int k = 0; k < m; ++k) {
        const double start = timing.initial_ramp + k * interval;
        push(start, s.hold_values_[k], k);
        push(start + timing.hold, s.hold_values_[k], k);
    }
    const double end = timing.total_duration();
    push(end, rabi ? limits.clamp(0.0) : s.hold_values_.back(), rabi ? -1 : m - 1);
    return s;
}

}  // namespace rydode
