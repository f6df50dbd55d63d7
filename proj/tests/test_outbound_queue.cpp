#include <catch_amalgamated.hpp>

#include "sonify/outbound_queue.hpp"
#include "sonify/protocol.hpp"

using namespace sonify;

namespace {

auto text(const std::string& s) {
    return std::make_shared<const std::string>(s);
}

auto audio(std::size_t frames) {
    return std::make_shared<const std::vector<std::uint8_t>>(8 + frames * 4, 0);
}

// Drains the queue, returning "T:<text>" or "A:<start>" per frame.
std::vector<std::string> drain(OutboundQueue& q) {
    std::vector<std::string> out;
    while (const auto* f = q.begin_write()) {
        out.push_back(f->binary ? "A:" + std::to_string(f->start_frame) : "T:" + *f->text);
        q.pop();
    }
    return out;
}

}  // namespace

TEST_CASE("frames leave in order") {
    OutboundQueue q(10000);
    q.push_text(text("a"));
    q.push_audio(audio(1024), 0, 1024);
    q.push_text(text("b"));
    q.push_audio(audio(1024), 1024, 1024);
    CHECK(q.queued_audio_frames() == 2048);
    CHECK(drain(q) == std::vector<std::string>{"T:a", "A:0", "T:b", "A:1024"});
    CHECK(q.empty());
    CHECK(q.dropped_frames() == 0);
}

TEST_CASE("a lagging client drops the oldest audio and gets a resync") {
    OutboundQueue q(2048);
    q.push_audio(audio(1024), 0, 1024);
    q.push_text(text("s1"));
    q.push_audio(audio(1024), 1024, 1024);
    q.push_audio(audio(1024), 2048, 1024);  // over the limit: frame 0 goes
    q.push_audio(audio(1024), 3072, 1024);  // and frame 1024
    CHECK(q.dropped_frames() == 2048);
    CHECK(q.queued_audio_frames() == 2048);
    const auto resync = serialize(ServerMessage{msg::Resync{2048}});
    CHECK(drain(q) == std::vector<std::string>{"T:s1", "T:" + resync, "A:2048", "A:3072"});
}

TEST_CASE("the frame being written is never dropped") {
    OutboundQueue q(1024);
    q.push_audio(audio(1024), 0, 1024);
    const auto* f = q.begin_write();
    REQUIRE(f != nullptr);
    CHECK(q.writing());
    q.push_audio(audio(1024), 1024, 1024);
    q.push_audio(audio(1024), 2048, 1024);
    CHECK(q.begin_write()->start_frame == 0);  // still in flight
    q.pop();
    const auto resync = serialize(ServerMessage{msg::Resync{2048}});
    CHECK(drain(q) == std::vector<std::string>{"T:" + resync, "A:2048"});
}

TEST_CASE("text is never dropped") {
    OutboundQueue q(0);
    for (int i = 0; i < 100; ++i) q.push_text(text(std::to_string(i)));
    q.push_audio(audio(10), 0, 10);
    const auto out = drain(q);
    CHECK(out.size() == 101);
    CHECK(out.front() == "T:0");
}

TEST_CASE("clear empties everything") {
    OutboundQueue q(100);
    q.push_text(text("x"));
    q.begin_write();
    q.clear();
    CHECK(q.empty());
    CHECK_FALSE(q.writing());
    CHECK(q.begin_write() == nullptr);
}
