#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

namespace sonify {

/// One frame waiting to be written to a client.
struct OutboundFrame {
    bool binary = false;
    std::shared_ptr<const std::string> text;
    std::shared_ptr<const std::vector<std::uint8_t>> audio;
    std::uint64_t start_frame = 0;
    std::size_t frames = 0;  ///< audio frames carried, 0 for text
};

/// Per-client write queue. Text frames are never dropped; when more than
/// max_audio_frames of audio would be queued, the oldest audio frames that
/// are not already being written are discarded and a resync text frame is
/// emitted ahead of the next audio frame.
class OutboundQueue {
public:
    explicit OutboundQueue(std::size_t max_audio_frames) : max_audio_frames_(max_audio_frames) {}

    void push_text(std::shared_ptr<const std::string> text);
    void push_audio(std::shared_ptr<const std::vector<std::uint8_t>> bytes, std::uint64_t start_frame,
                    std::size_t frames);

    /// Next frame to write, which stays in flight (and is never dropped) until
    /// pop(). Null when empty.
    const OutboundFrame* begin_write();
    void pop();
    void clear();

    bool writing() const noexcept { return writing_; }
    bool empty() const noexcept { return queue_.empty(); }
    std::size_t queued_audio_frames() const noexcept;
    std::uint64_t dropped_frames() const noexcept { return dropped_; }

private:
    std::size_t max_audio_frames_;
    std::deque<OutboundFrame> queue_;
    bool writing_ = false;
    bool resync_pending_ = false;
    std::uint64_t dropped_ = 0;
};

}  // namespace sonify
