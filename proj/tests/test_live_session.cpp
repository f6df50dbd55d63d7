#include <catch_amalgamated.hpp>

#include <filesystem>

#include "sonify/live_session.hpp"
#include "sonify/session_io.hpp"

using namespace sonify;
using nlohmann::json;

namespace {

const std::filesystem::path kFixtures = SONIFY_FIXTURES_DIR;

LiveSession make(const char* name) {
    LiveSession::Options opts;
    opts.base_dir = kFixtures;
    return LiveSession(load_session(kFixtures / name), opts);
}

template <class T>
const T& only(const std::vector<ServerMessage>& v) {
    REQUIRE(v.size() == 1);
    REQUIRE(std::holds_alternative<T>(v[0]));
    return std::get<T>(v[0]);
}

template <class T>
std::vector<T> of_type(const std::vector<ServerMessage>& v) {
    std::vector<T> out;
    for (const auto& m : v) {
        if (const auto* p = std::get_if<T>(&m)) out.push_back(*p);
    }
    return out;
}

}  // namespace

TEST_CASE("connect sends the full state and tells others") {
    auto live = make("airquality_fm.json");
    auto [full, others] = live.connect();
    CHECK(full.full);
    CHECK(full.body == live.state());
    CHECK(full.body["clients"] == 1);
    CHECK(full.body["series"].size() == 5);
    CHECK(full.body["series"][0]["name"] == "SO2");
    CHECK(full.body["series"][0]["color"].get<std::string>().size() == 7);
    CHECK(full.body["length"] == live.current()->length());

    auto second = live.connect();
    const auto& patch = only<msg::StateSnapshot>(second.second);
    CHECK_FALSE(patch.full);
    CHECK(full.body.patch(patch.body)["clients"] == 2);
    CHECK(second.first.seq > full.seq);
    const auto gone = only<msg::StateSnapshot>(live.disconnect());
    CHECK(live.state()["clients"] == 1);
    CHECK(gone.body.size() == 1);
}

TEST_CASE("accepted updates ack the sender and patch everyone else") {
    auto live = make("airquality_fm.json");
    auto before = live.connect().first.body;
    const auto reply = live.handle_text(R"({"type":"move_speaker","id":"m1","track":0,"x":0.25})");
    const auto& mine = only<msg::StateSnapshot>(reply.to_sender);
    const auto& theirs = only<msg::StateSnapshot>(reply.broadcast);
    CHECK(mine.ack == std::optional<std::string>("m1"));
    CHECK_FALSE(theirs.ack);
    CHECK(mine.body == theirs.body);
    CHECK(mine.seq == theirs.seq);
    const auto after = before.patch(mine.body);
    CHECK(after == live.state());
    CHECK(after["tracks"][0]["pan"] == 0.25);
    CHECK(live.current()->tracks[0].pan == 0.25);
}

TEST_CASE("malformed frames produce an error and change nothing") {
    auto live = make("airquality_fm.json");
    live.connect();
    const auto before = live.state();
    const auto before_rev = live.current()->revision;
    for (const char* text : {"{{{", R"({"type":"warp","id":"w9"})", R"({"type":"mute","id":"m","track":"x"})"}) {
        INFO(text);
        const auto reply = live.handle_text(text);
        const auto& err = only<msg::Error>(reply.to_sender);
        CHECK(err.code == "malformed");
        CHECK(reply.broadcast.empty());
    }
    CHECK(only<msg::Error>(live.handle_text(R"({"type":"warp","id":"w9"})").to_sender).ack ==
          std::optional<std::string>("w9"));
    CHECK(live.state() == before);
    CHECK(live.current()->revision == before_rev);
}

TEST_CASE("rejected updates produce an error and change nothing") {
    auto live = make("airquality_fm.json");
    const auto before = live.state();
    // the pair already has 1 -> 0; closing the loop is a cycle
    const auto reply = live.handle_text(R"({"type":"add_fm_link","id":"c","modulator":0,"carrier":1})");
    const auto& err = only<msg::Error>(reply.to_sender);
    CHECK(err.code == "rejected");
    CHECK(err.ack == std::optional<std::string>("c"));
    CHECK(reply.broadcast.empty());
    CHECK(live.state() == before);
    CHECK(only<msg::Error>(live.handle_text(R"({"type":"mute","track":77})").to_sender).code == "rejected");
}

TEST_CASE("chunks are contiguous and stereo") {
    auto live = make("eeg_fm.json");
    live.handle_text(R"({"type":"play"})");
    std::uint64_t expected = 0;
    for (int i = 0; i < 5; ++i) {
        const auto chunk = live.render_chunk();
        CHECK(chunk.audio.start_frame == expected);
        CHECK(chunk.audio.frames() == 1024);
        expected += 1024;
    }
    CHECK(live.next_frame() == expected);
}

TEST_CASE("cursor and meters arrive at least ten times a second") {
    auto live = make("eeg_fm.json");
    live.handle_text(R"({"type":"play"})");
    std::vector<std::uint64_t> at;
    for (int i = 0; i < 40; ++i) {
        const auto chunk = live.render_chunk();
        const auto meters = of_type<msg::LevelMeters>(chunk.events);
        const auto cursors = of_type<msg::CursorUpdate>(chunk.events);
        CHECK(meters.size() == cursors.size());
        if (!meters.empty()) {
            at.push_back(chunk.audio.start_frame + 1024);
            CHECK(cursors[0].playing);
            CHECK(cursors[0].frame == at.back());
            CHECK(meters[0].master > 0.0);
            CHECK(meters[0].tracks.size() == 4);
            CHECK(meters[0].tracks[0].frequency >= 261.6);
        }
    }
    REQUIRE(at.size() >= 2);
    for (std::size_t i = 1; i < at.size(); ++i) CHECK(at[i] - at[i - 1] <= 4410);
}

TEST_CASE("meters read zero while stopped") {
    auto live = make("eeg_fm.json");
    for (int i = 0; i < 8; ++i) {
        for (const auto& m : of_type<msg::LevelMeters>(live.render_chunk().events)) {
            CHECK(m.master == 0.0);
            for (const auto& t : m.tracks) CHECK(t.rms == 0.0);
        }
    }
}

TEST_CASE("trigger events carry the row and value") {
    auto live = make("ramp_discrete.json");
    live.handle_text(R"({"type":"play"})");
    std::vector<msg::TriggerEvent> triggers;
    for (int i = 0; i < 240; ++i) {
        for (const auto& t : of_type<msg::TriggerEvent>(live.render_chunk().events)) triggers.push_back(t);
    }
    REQUIRE(triggers.size() == 5);
    CHECK(triggers[0].row == 10);
    CHECK(triggers[0].value == Catch::Approx(1.0));
    CHECK(triggers[0].time == Catch::Approx(0.5));
    CHECK(triggers[4].row == 90);
}

TEST_CASE("the end of the data stops the authoritative transport") {
    auto live = make("adsr_pulse.json");  // 1 s of data
    live.handle_text(R"({"type":"play"})");
    const auto serial = live.current()->transport.play_serial;
    std::optional<LiveSession::Chunk> end;
    for (int i = 0; i < 60 && !end; ++i) {
        auto chunk = live.render_chunk();
        if (chunk.reached_end) end = std::move(chunk);
    }
    REQUIRE(end);
    CHECK(end->play_serial == serial);
    CHECK(live.playback_ended(serial + 1).empty());  // stale run
    const auto& patch = only<msg::StateSnapshot>(live.playback_ended(serial));
    CHECK_FALSE(patch.full);
    CHECK(live.state()["playing"] == false);
    CHECK(live.playback_ended(serial).empty());
}

TEST_CASE("live output replays frame-clocked to the same samples") {
    auto live = make("airquality_fm.json");
    live.connect();
    std::vector<std::int16_t> pcm;
    const std::vector<std::pair<int, std::string>> script{
        {0, R"({"type":"play"})"},
        {3, R"({"type":"move_speaker","track":0,"x":0.3})"},
        {5, R"({"type":"mute","track":2,"muted":true})"},
        {5, R"({"type":"set_rate","rate":0.05})"},
        {9, R"({"type":"set_mapping","track":1,"target":"modulation_index","min":0.5,"range":2})"},
        {12, R"({"type":"stop"})"},
        {14, R"({"type":"play"})"},
        {15, R"({"type":"add_fm_link","modulator":1,"carrier":0})"},  // rejected
        {17, R"({"type":"reset"})"},
        {20, R"({"type":"set_interleave","enabled":true,"tracks":[0,2]})"},
    };
    std::size_t next = 0;
    for (int chunk = 0; chunk < 30; ++chunk) {
        while (next < script.size() && script[next].first == chunk) live.handle_text(script[next++].second);
        const auto c = live.render_chunk();
        pcm.insert(pcm.end(), c.audio.pcm.begin(), c.audio.pcm.end());
    }
    const auto timeline = live.timeline();
    CHECK(timeline.size() == 9);
    const auto offline = render_offline(live.initial(), pcm.size() / 2, timeline, kFixtures);
    CHECK(offline.pcm == pcm);
}
