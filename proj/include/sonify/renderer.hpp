#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sonify/scheduler.hpp"
#include "sonify/session.hpp"

namespace sonify {

struct StereoFrame {
    double left = 0.0;
    double right = 0.0;

    friend bool operator==(const StereoFrame&, const StereoFrame&) = default;
};

struct StereoBlock {
    std::vector<StereoFrame> frames;
    double sample_rate = kDefaultSampleRate;

    friend bool operator==(const StereoBlock&, const StereoBlock&) = default;
};

struct TriggerRecord {
    std::uint64_t frame = 0;
    TrackId track;
    std::size_t row = 0;
    double value = 0.0;
};

/// Audible output of one track over a block.
struct TrackMeter {
    TrackId track;
    double sum_squares = 0.0;
    double frequency = 0.0;  ///< current mapped oscillator frequency, 0 for samples
};

struct BlockReport {
    std::uint64_t start_frame = 0;
    std::size_t frames = 0;
    std::vector<TriggerRecord> triggers;
    std::vector<TrackMeter> meters;
    double master_sum_squares = 0.0;  ///< summed over both channels
    bool playing = false;             ///< transport state after the block
    bool reached_end = false;         ///< playback ran off the end of the data in this block
    double cursor = 0.0;
    std::uint64_t play_serial = 0;
    /// Revision of the snapshot adopted at this block's start, if it changed.
    std::optional<std::uint64_t> adopted_revision;
};

/// Block renderer. Owns all runtime playback state (cursor, voices, oscillator
/// phases, live discrete thresholds); configuration comes only from the
/// immutable snapshots passed in. A new snapshot takes effect at the start of
/// the block it is passed with. Identical snapshot sequences produce
/// bit-identical output.
class Renderer {
public:
    Renderer();
    ~Renderer();
    Renderer(Renderer&&) noexcept;
    Renderer& operator=(Renderer&&) noexcept;

    /// Renders snapshot->block_size frames.
    StereoBlock render_block(const std::shared_ptr<const Session>& snapshot, std::uint64_t start_frame);

    /// Renders out.size() frames into `out` and describes them in `report`.
    void render_block(const std::shared_ptr<const Session>& snapshot, std::uint64_t start_frame,
                      std::span<StereoFrame> out, BlockReport& report);

    const Transport& transport() const noexcept;
    /// Rows in which a carrier's FM spectrum was estimated to cross Nyquist.
    std::uint64_t alias_warnings() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sonify
