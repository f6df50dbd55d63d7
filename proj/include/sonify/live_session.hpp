#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <atomic>
#include <mutex>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sonify/protocol.hpp"
#include "sonify/render_job.hpp"
#include "sonify/renderer.hpp"
#include "sonify/session.hpp"

namespace sonify {

/// Network-agnostic live session host. Control calls (handle_*, connect,
/// disconnect) are serialized internally and are the only writers of the
/// authoritative session; render_chunk() runs on the audio side and only
/// reads the latest published snapshot at each block boundary.
class LiveSession {
public:
    struct Options {
        std::size_t chunk_frames = 1024;
        double meter_seconds = 0.1;
        std::filesystem::path base_dir;  ///< for relative dataset / sample paths
    };

    /// Messages produced by one control call.
    struct Reply {
        std::vector<ServerMessage> to_sender;
        std::vector<ServerMessage> broadcast;  ///< for every client except the sender
    };

    /// Output of one audio chunk period.
    struct Chunk {
        msg::AudioChunk audio;
        std::vector<ServerMessage> events;  ///< triggers, then cursor and meters when due
        bool reached_end = false;
        std::uint64_t play_serial = 0;  ///< of the run that reached the end
    };

    explicit LiveSession(Session initial, Options options);
    explicit LiveSession(Session initial);

    /// A client frame as text. Malformed input and rejected updates yield an
    /// error for the sender only and leave the state untouched.
    Reply handle_text(std::string_view text);
    Reply handle(const ClientFrame& frame);

    /// Registers a client and returns the full state snapshot it should
    /// receive first. Other clients get the client-count patch.
    std::pair<msg::StateSnapshot, std::vector<ServerMessage>> connect();
    std::vector<ServerMessage> disconnect();

    /// Renders the next chunk_frames frames.
    Chunk render_chunk();

    /// Called by the host when a chunk reported the end of the data, so the
    /// authoritative transport flips to stopped. Returns the broadcast patch,
    /// or nothing when a newer play request superseded that run.
    std::vector<ServerMessage> playback_ended(std::uint64_t play_serial);

    std::shared_ptr<const Session> current() const;
    nlohmann::json state() const;
    std::uint64_t next_frame() const;
    const Options& options() const noexcept { return options_; }

    /// Accepted updates stamped with the frame at which the renderer adopted
    /// them, for frame-clocked replay through render_offline().
    std::vector<TimedMessage> timeline() const;
    /// The session the timeline starts from.
    const Session& initial() const noexcept { return initial_; }

private:
    Reply apply(const ClientMessage& message, const std::optional<std::string>& id);
    msg::StateSnapshot publish(std::shared_ptr<const Session> next, const std::optional<std::string>& ack,
                               const ClientMessage* message);
    nlohmann::json state_locked() const;

    Options options_;
    Session initial_;

    mutable std::mutex control_mutex_;
    std::shared_ptr<const Session> session_;
    nlohmann::json last_state_;
    std::uint64_t seq_ = 0;
    std::size_t clients_ = 0;

    // handoff to the render side
    mutable std::mutex mailbox_mutex_;
    std::shared_ptr<const Session> mailbox_;
    std::vector<ClientMessage> pending_;
    std::vector<TimedMessage> timeline_;

    // render side only
    Renderer renderer_;
    std::shared_ptr<const Session> rendering_;
    std::atomic<std::uint64_t> frame_{0};
    std::size_t chunks_since_meter_ = 0;
    std::vector<double> meter_sums_;
    std::vector<TrackMeter> last_meters_;
    double master_sum_ = 0.0;
    std::uint64_t meter_frames_ = 0;
};

/// Full state document as sent in state_snapshot messages.
nlohmann::json session_state_json(const Session& session, std::size_t clients);

}  // namespace sonify
