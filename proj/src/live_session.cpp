#include "sonify/live_session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sonify/session_io.hpp"
#include "sonify/update.hpp"
#include "sonify/wav.hpp"

namespace sonify {

namespace {

std::string hex_color(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

// Best effort: the id of a frame that failed to parse as a message.
std::optional<std::string> salvage_id(std::string_view text) {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_object()) {
        if (const auto it = j.find("id"); it != j.end() && it->is_string()) return it->get<std::string>();
    }
    return std::nullopt;
}

}  // namespace

nlohmann::json session_state_json(const Session& session, std::size_t clients) {
    auto j = to_json(session);
    nlohmann::json series = nlohmann::json::array();
    if (session.dataset) {
        for (const auto& s : session.dataset->series()) {
            series.push_back({{"name", s.name()},
                              {"min", s.min()},
                              {"max", s.max()},
                              {"mean", s.mean()},
                              {"stddev", s.stddev()},
                              {"color", hex_color(s.color())}});
        }
    }
    j["series"] = std::move(series);
    j["length"] = session.length();
    j["playing"] = session.transport.playing;
    j["revision"] = session.revision;
    j["clients"] = clients;
    return j;
}

LiveSession::LiveSession(Session initial, Options options)
    : options_(std::move(options)), initial_(std::move(initial)) {
    session_ = std::make_shared<const Session>(initial_);
    mailbox_ = session_;
    last_state_ = session_state_json(*session_, clients_);
}

LiveSession::LiveSession(Session initial) : LiveSession(std::move(initial), Options{}) {}

nlohmann::json LiveSession::state_locked() const {
    return session_state_json(*session_, clients_);
}

nlohmann::json LiveSession::state() const {
    std::lock_guard lock(control_mutex_);
    return state_locked();
}

std::shared_ptr<const Session> LiveSession::current() const {
    std::lock_guard lock(control_mutex_);
    return session_;
}

std::uint64_t LiveSession::next_frame() const {
    return frame_.load();
}

std::vector<TimedMessage> LiveSession::timeline() const {
    std::lock_guard lock(mailbox_mutex_);
    return timeline_;
}

msg::StateSnapshot LiveSession::publish(std::shared_ptr<const Session> next, const std::optional<std::string>& ack,
                                        const ClientMessage* message) {
    if (next != session_) {
        session_ = std::move(next);
        std::lock_guard lock(mailbox_mutex_);
        mailbox_ = session_;
        if (message) pending_.push_back(*message);
    }
    auto state = state_locked();
    auto patch = nlohmann::json::diff(last_state_, state);
    last_state_ = std::move(state);
    return {++seq_, false, std::move(patch), ack};
}

LiveSession::Reply LiveSession::apply(const ClientMessage& message, const std::optional<std::string>& id) {
    Reply reply;
    std::shared_ptr<const Session> next;
    try {
        next = std::make_shared<const Session>(apply_update(*session_, message, options_.base_dir));
    } catch (const ValidationError& e) {
        reply.to_sender.push_back(msg::Error{"rejected", e.what(), id});
        return reply;
    }
    auto snapshot = publish(std::move(next), id, &message);
    reply.to_sender.push_back(snapshot);
    snapshot.ack.reset();
    reply.broadcast.push_back(std::move(snapshot));
    return reply;
}

LiveSession::Reply LiveSession::handle(const ClientFrame& frame) {
    std::lock_guard lock(control_mutex_);
    return apply(frame.message, frame.id);
}

LiveSession::Reply LiveSession::handle_text(std::string_view text) {
    ClientFrame frame;
    try {
        frame = parse_client_message(text);
    } catch (const ProtocolError& e) {
        Reply reply;
        reply.to_sender.push_back(msg::Error{"malformed", e.what(), salvage_id(text)});
        return reply;
    }
    return handle(frame);
}

std::pair<msg::StateSnapshot, std::vector<ServerMessage>> LiveSession::connect() {
    std::lock_guard lock(control_mutex_);
    ++clients_;
    auto patch = publish(session_, std::nullopt, nullptr);
    msg::StateSnapshot full{seq_, true, last_state_, std::nullopt};
    return {std::move(full), {std::move(patch)}};
}

std::vector<ServerMessage> LiveSession::disconnect() {
    std::lock_guard lock(control_mutex_);
    if (clients_ > 0) --clients_;
    return {publish(session_, std::nullopt, nullptr)};
}

std::vector<ServerMessage> LiveSession::playback_ended(std::uint64_t play_serial) {
    std::lock_guard lock(control_mutex_);
    if (!session_->transport.playing || session_->transport.play_serial != play_serial) return {};
    const ClientMessage stop = msg::Stop{};
    auto next = std::make_shared<const Session>(apply_update(*session_, stop, options_.base_dir));
    return {publish(std::move(next), std::nullopt, &stop)};
}

LiveSession::Chunk LiveSession::render_chunk() {
    Chunk chunk;
    const std::uint64_t start = frame_.load();
    chunk.audio.start_frame = start;
    chunk.audio.pcm.reserve(options_.chunk_frames * 2);

    std::vector<StereoFrame> buffer;
    BlockReport report;
    std::uint64_t frame = start;
    const std::uint64_t end = start + options_.chunk_frames;
    while (frame < end) {
        {
            std::lock_guard lock(mailbox_mutex_);
            if (mailbox_ != rendering_) {
                rendering_ = mailbox_;
                for (auto& m : pending_) timeline_.push_back({frame, std::move(m)});
                pending_.clear();
            }
        }
        const auto block = std::max<std::size_t>(rendering_->block_size, 1);
        // blocks stay aligned to the global frame grid, like the offline renderer
        const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(block - frame % block, end - frame));
        buffer.resize(n);
        renderer_.render_block(rendering_, frame, buffer, report);

        for (const auto& f : buffer) {
            chunk.audio.pcm.push_back(to_pcm16(f.left));
            chunk.audio.pcm.push_back(to_pcm16(f.right));
        }
        for (const auto& t : report.triggers) {
            chunk.events.push_back(msg::TriggerEvent{static_cast<double>(t.frame) / rendering_->sample_rate, t.track,
                                                     t.row, t.value});
        }
        if (report.meters.size() != meter_sums_.size()) meter_sums_.assign(report.meters.size(), 0.0);
        for (std::size_t i = 0; i < report.meters.size(); ++i) meter_sums_[i] += report.meters[i].sum_squares;
        last_meters_ = report.meters;
        master_sum_ += report.master_sum_squares;
        meter_frames_ += n;
        if (report.reached_end) {
            chunk.reached_end = true;
            chunk.play_serial = report.play_serial;
        }
        frame += n;
    }
    frame_.store(end);

    // Meters and cursor go out on the largest whole number of chunks that fits
    // in the meter period, so their rate never drops below 1 / meter_seconds.
    const auto per_meter = std::max<std::size_t>(
        1, static_cast<std::size_t>(options_.meter_seconds * rendering_->sample_rate) / options_.chunk_frames);
    if (++chunks_since_meter_ >= per_meter || chunk.reached_end) {
        const bool playing = report.playing;
        const auto& t = renderer_.transport();
        chunk.events.push_back(msg::CursorUpdate{t.cursor, static_cast<std::uint64_t>(t.cursor), playing, end});
        msg::LevelMeters meters;
        const double frames = static_cast<double>(std::max<std::uint64_t>(meter_frames_, 1));
        meters.master = playing ? std::sqrt(master_sum_ / (2.0 * frames)) : 0.0;
        for (std::size_t i = 0; i < last_meters_.size(); ++i) {
            meters.tracks.push_back(
                {last_meters_[i].track, playing ? std::sqrt(meter_sums_[i] / frames) : 0.0, last_meters_[i].frequency});
        }
        chunk.events.push_back(std::move(meters));
        chunks_since_meter_ = 0;
        std::fill(meter_sums_.begin(), meter_sums_.end(), 0.0);
        master_sum_ = 0.0;
        meter_frames_ = 0;
    }
    return chunk;
}

}  // namespace sonify
