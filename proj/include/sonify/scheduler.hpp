#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sonify/session.hpp"

namespace sonify {

enum class TransportState { Stopped, Playing };

/// Runtime transport: where playback is and how fast it moves.
struct Transport {
    double rate = 0.2;
    double cursor = 0.0;  ///< fractional row position
    TransportState state = TransportState::Stopped;
    bool interleave_enabled = false;
    std::vector<TrackId> interleave_set;

    /// Seconds per row; stretched to N * rate while interleaving N tracks.
    double row_period() const noexcept;
    void reset() noexcept { cursor = 0.0; }
};

struct AdvanceResult {
    double cursor = 0.0;
    /// Integer rows entered during the step, ascending.
    std::vector<std::size_t> crossed;
    bool stopped = false;
};

/// Moves a playing transport forward by `elapsed` seconds. Reaching the end
/// of the data clamps the cursor at dataset_len and stops the transport.
AdvanceResult advance(Transport& transport, double elapsed, std::size_t dataset_len);

double map_frequency(double norm, const FrequencyMapping& target) noexcept;
double map_amplitude(double norm) noexcept;
double map_modulation_index(double norm, const ModulationIndexMapping& target) noexcept;

struct DiscreteStep {
    bool trigger = false;
    DiscreteRule rule;
};

/// One row of threshold triggering. Rising thresholds (increment >= 0) fire on
/// value >= current; falling ones fire on value <= current. A value that
/// overshoots several levels fires once and skips the threshold past it.
DiscreteStep discrete_step(const DiscreteRule& rule, double value) noexcept;

struct InterleaveSlot {
    TrackId track;
    double offset = 0.0;    ///< seconds after the row starts
    double start = 0.0;     ///< seconds after row 0 starts
    double duration = 0.0;
};

/// Slot k of N starts k * rate into the row and lasts one rate; the row lasts
/// N * rate.
std::vector<InterleaveSlot> interleave_schedule(std::span<const TrackId> set, std::size_t row, double rate);

}  // namespace sonify
