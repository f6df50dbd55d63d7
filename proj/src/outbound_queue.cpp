#include "sonify/outbound_queue.hpp"

#include "sonify/protocol.hpp"

namespace sonify {

void OutboundQueue::push_text(std::shared_ptr<const std::string> text) {
    queue_.push_back({false, std::move(text), nullptr, 0, 0});
}

std::size_t OutboundQueue::queued_audio_frames() const noexcept {
    std::size_t n = 0;
    for (const auto& f : queue_) n += f.frames;
    return n;
}

void OutboundQueue::push_audio(std::shared_ptr<const std::vector<std::uint8_t>> bytes, std::uint64_t start_frame,
                               std::size_t frames) {
    std::size_t queued = queued_audio_frames() + frames;
    for (auto it = queue_.begin() + (writing_ ? 1 : 0); it != queue_.end() && queued > max_audio_frames_;) {
        if (it->binary) {
            queued -= it->frames;
            dropped_ += it->frames;
            it = queue_.erase(it);
            resync_pending_ = true;
        } else {
            ++it;
        }
    }
    queue_.push_back({true, nullptr, std::move(bytes), start_frame, frames});
}

const OutboundFrame* OutboundQueue::begin_write() {
    if (writing_) return &queue_.front();
    if (queue_.empty()) return nullptr;
    if (queue_.front().binary && resync_pending_) {
        resync_pending_ = false;
        const auto resync = serialize(ServerMessage{msg::Resync{queue_.front().start_frame}});
        queue_.push_front({false, std::make_shared<const std::string>(resync), nullptr, 0, 0});
    }
    writing_ = true;
    return &queue_.front();
}

void OutboundQueue::pop() {
    if (!queue_.empty()) queue_.pop_front();
    writing_ = false;
}

void OutboundQueue::clear() {
    queue_.clear();
    writing_ = false;
    resync_pending_ = false;
}

}  // namespace sonify
