#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "sonify/protocol.hpp"
#include "sonify/renderer.hpp"
#include "sonify/session.hpp"

namespace sonify {

struct RenderJob {
    std::filesystem::path config;
    std::filesystem::path output;
    std::optional<double> duration;  ///< seconds; must not exceed the full play time
    std::optional<std::filesystem::path> log;
    std::optional<double> sample_rate;
};

struct RenderSummary {
    std::uint64_t frames = 0;
    std::size_t triggers = 0;
    double peak = 0.0;  ///< largest absolute sample before quantization
    std::uint64_t alias_warnings = 0;
};

/// A control message applied at the block boundary starting at `frame`.
struct TimedMessage {
    std::uint64_t frame = 0;
    ClientMessage message;
};

struct OfflineRender {
    std::uint64_t frames = 0;
    std::vector<std::int16_t> pcm;  ///< interleaved stereo
    std::vector<TriggerRecord> triggers;
    double peak = 0.0;
    std::uint64_t alias_warnings = 0;
};

/// ceil(seconds * sample_rate), rounded up to a whole number of blocks.
std::uint64_t frames_for_seconds(double seconds, double sample_rate, std::size_t block_size);

/// Frames needed to play the whole dataset once.
std::uint64_t play_frames(const Session& session);

/// Copy of `session` with a pending play request, as the CLI renders it.
Session with_play_request(Session session);

/// Renders `frames` frames (a whole number of blocks). Timeline entries are
/// applied, in order, at the first block starting at or after their frame;
/// updates that fail validation are skipped.
OfflineRender render_offline(const Session& session, std::uint64_t frames, std::span<const TimedMessage> timeline = {},
                             const std::filesystem::path& base_dir = {});

/// Loads the config, renders the whole dataset (or the override) to a 16-bit
/// stereo WAV and optionally writes the trigger log as JSON lines.
/// Throws ConfigError, DatasetError or IoError.
RenderSummary render(const RenderJob& job);

}  // namespace sonify
