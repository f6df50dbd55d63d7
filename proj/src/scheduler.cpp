#include "sonify/scheduler.hpp"

#include <cmath>

namespace sonify {

double Transport::row_period() const noexcept {
    if (interleave_enabled && !interleave_set.empty()) {
        return rate * static_cast<double>(interleave_set.size());
    }
    return rate;
}

AdvanceResult advance(Transport& transport, double elapsed, std::size_t dataset_len) {
    AdvanceResult result;
    result.cursor = transport.cursor;
    if (transport.state != TransportState::Playing || !(elapsed > 0.0)) {
        return result;
    }
    const double before = transport.cursor;
    double after = before + elapsed / transport.row_period();
    const auto len = static_cast<double>(dataset_len);
    if (after >= len) {
        after = len;
        transport.state = TransportState::Stopped;
        result.stopped = true;
    }
    const auto first = static_cast<std::size_t>(std::floor(before)) + 1;
    for (std::size_t row = first; row < dataset_len && static_cast<double>(row) <= after; ++row) {
        result.crossed.push_back(row);
    }
    transport.cursor = after;
    result.cursor = after;
    return result;
}

double map_frequency(double norm, const FrequencyMapping& target) noexcept {
    return target.f_min + norm * target.f_range;
}

double map_amplitude(double norm) noexcept {
    return norm;
}

double map_modulation_index(double norm, const ModulationIndexMapping& target) noexcept {
    return target.i_min + norm * target.i_range;
}

DiscreteStep discrete_step(const DiscreteRule& rule, double value) noexcept {
    DiscreteStep step{false, rule};
    auto& r = step.rule;
    const bool rising = r.increment >= 0.0;
    auto reached = [&] { return rising ? value >= r.current_threshold : value <= r.current_threshold; };
    if (!reached()) {
        return step;
    }
    step.trigger = true;
    r.current_threshold += r.increment;
    if (r.increment != 0.0) {
        if (reached()) {
            // jump most of the way so tiny increments cannot stall the caller
            const double steps = std::floor((value - r.current_threshold) / r.increment);
            r.current_threshold += steps * r.increment;
        }
        while (reached()) {
            r.current_threshold += r.increment;
        }
    }
    return step;
}

std::vector<InterleaveSlot> interleave_schedule(std::span<const TrackId> set, std::size_t row, double rate) {
    std::vector<InterleaveSlot> slots;
    slots.reserve(set.size());
    const double row_start = static_cast<double>(row) * static_cast<double>(set.size()) * rate;
    for (std::size_t k = 0; k < set.size(); ++k) {
        const double offset = static_cast<double>(k) * rate;
        slots.push_back({set[k], offset, row_start + offset, rate});
    }
    return slots;
}

}  // namespace sonify
