#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sonify/data.hpp"
#include "sonify/synth.hpp"

namespace sonify {

struct TrackId {
    std::uint32_t value = 0;

    friend auto operator<=>(const TrackId&, const TrackId&) = default;
};

struct OscillatorSource {
    Waveform waveform = Waveform::Sine;
    double frequency = 440.0;
    double amplitude = 0.5;

    friend bool operator==(const OscillatorSource&, const OscillatorSource&) = default;
};

struct SampleSource {
    std::string file;
    double speed = 1.0;
    double amplitude = 1.0;
    /// Decoded at configuration time; never loaded on the render path.
    std::shared_ptr<const SampleBuffer> buffer;

    friend bool operator==(const SampleSource& a, const SampleSource& b) {
        return a.file == b.file && a.speed == b.speed && a.amplitude == b.amplitude;
    }
};

using SoundSource = std::variant<OscillatorSource, SampleSource>;

inline bool is_oscillator(const SoundSource& s) noexcept {
    return std::holds_alternative<OscillatorSource>(s);
}

double source_amplitude(const SoundSource& source) noexcept;

struct FrequencyMapping {
    double f_min = 261.6;
    double f_range = 600.0;

    friend bool operator==(const FrequencyMapping&, const FrequencyMapping&) = default;
};

struct ModulationIndexMapping {
    double i_min = 0.0;
    double i_range = 5.0;

    friend bool operator==(const ModulationIndexMapping&, const ModulationIndexMapping&) = default;
};

/// At most one mapping per target kind.
struct Mappings {
    std::optional<FrequencyMapping> frequency;
    bool amplitude = false;
    std::optional<ModulationIndexMapping> modulation_index;

    friend bool operator==(const Mappings&, const Mappings&) = default;
};

enum class PlayMode { Continuous, Discrete };

std::string_view to_string(PlayMode mode) noexcept;
std::optional<PlayMode> parse_play_mode(std::string_view text) noexcept;

/// Threshold and increment are in raw data units. current_threshold is the
/// runtime level and starts at threshold.
struct DiscreteRule {
    double threshold = 0.0;
    double increment = 0.0;
    double current_threshold = 0.0;

    static DiscreteRule starting_at(double threshold, double increment) noexcept {
        return {threshold, increment, threshold};
    }

    friend bool operator==(const DiscreteRule&, const DiscreteRule&) = default;
};

struct TrackConfig {
    TrackId id;
    std::string series;
    SoundSource source = OscillatorSource{};
    PlayMode mode = PlayMode::Continuous;
    Mappings mappings;
    /// One envelope per mode, so edits survive a mode toggle.
    Envelope continuous_envelope = kContinuousEnvelope;
    Envelope discrete_envelope = kDiscreteEnvelope;
    double pan = 0.0;
    bool muted = false;
    std::optional<DiscreteRule> discrete;

    const Envelope& envelope() const noexcept {
        return mode == PlayMode::Continuous ? continuous_envelope : discrete_envelope;
    }
    Envelope& envelope() noexcept {
        return mode == PlayMode::Continuous ? continuous_envelope : discrete_envelope;
    }

    friend bool operator==(const TrackConfig&, const TrackConfig&) = default;
};

struct FmLink {
    TrackId modulator;
    TrackId carrier;

    friend bool operator==(const FmLink&, const FmLink&) = default;
};

struct TransportSettings {
    double rate = 0.2;  ///< seconds per data point
    bool interleave_enabled = false;
    std::vector<TrackId> interleave_set;
    bool playing = false;
    /// Bumped on every play / reset request so the render side can tell a new
    /// request from a stale flag.
    std::uint64_t play_serial = 0;
    std::uint64_t reset_serial = 0;

    /// Seconds the transport spends on one data row.
    double row_period() const noexcept;

    friend bool operator==(const TransportSettings&, const TransportSettings&) = default;
};

inline constexpr double kDefaultSampleRate = 44100.0;
inline constexpr std::size_t kDefaultBlockSize = 64;

/// Immutable once published: the render side only ever sees
/// std::shared_ptr<const Session>.
struct Session {
    std::shared_ptr<const Dataset> dataset;
    std::string dataset_path;
    Normalization normalization = Normalization::MinMax;
    double sample_rate = kDefaultSampleRate;
    std::size_t block_size = kDefaultBlockSize;
    std::uint32_t color_seed = 0;
    std::vector<TrackConfig> tracks;
    std::vector<FmLink> links;
    TransportSettings transport;
    /// Incremented by every accepted update; not part of the config file.
    std::uint64_t revision = 0;

    const TrackConfig* find_track(TrackId id) const noexcept;
    TrackConfig* find_track(TrackId id) noexcept;
    std::optional<std::size_t> track_index(TrackId id) const noexcept;

    /// Length of the dataset in rows, 0 without a dataset.
    std::size_t length() const noexcept { return dataset ? dataset->length() : 0; }
    /// Time to play the whole dataset from row 0.
    double total_play_seconds() const noexcept;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Checks every invariant the renderer relies on. Throws ValidationError.
void validate(const Session& session);

/// True if adding `link` to `links` would close a cycle (self links included).
bool creates_cycle(const std::vector<FmLink>& links, const FmLink& link);

/// Track indices ordered so every modulator precedes its carriers; ties keep
/// configuration order. Throws ValidationError on a cycle.
std::vector<std::size_t> fm_render_order(const Session& session);

/// One continuous sine track per series with a frequency mapping.
std::vector<TrackConfig> default_tracks(const Dataset& dataset);

/// Rule created when a track without one switches to discrete mode:
/// midpoint of the series range, no increment.
DiscreteRule default_discrete_rule(const AttributeSeries& series);

}  // namespace sonify

template <>
struct std::hash<sonify::TrackId> {
    std::size_t operator()(const sonify::TrackId& id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
