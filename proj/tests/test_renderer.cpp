#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "sonify/renderer.hpp"
#include "sonify/session_io.hpp"
#include "sonify/update.hpp"

using namespace sonify;
using Catch::Approx;

namespace {

const std::filesystem::path kFixtures = SONIFY_FIXTURES_DIR;

using Snapshot = std::shared_ptr<const Session>;

struct Run {
    std::vector<StereoFrame> frames;
    std::vector<TriggerRecord> triggers;
    std::vector<BlockReport> reports;
};

// Renders whole blocks; `edit` may swap the snapshot before each block.
template <class Edit>
Run render(Renderer& r, Snapshot s, std::size_t frames, Edit edit) {
    Run run;
    const auto block = s->block_size;
    std::vector<StereoFrame> buf(block);
    for (std::uint64_t f = 0; f < frames; f += block) {
        s = edit(f, s);
        BlockReport report;
        r.render_block(s, f, buf, report);
        run.frames.insert(run.frames.end(), buf.begin(), buf.end());
        run.triggers.insert(run.triggers.end(), report.triggers.begin(), report.triggers.end());
        run.reports.push_back(report);
    }
    return run;
}

Run render(Snapshot s, std::size_t frames) {
    Renderer r;
    return render(r, std::move(s), frames, [](std::uint64_t, Snapshot x) { return x; });
}

Snapshot playing(Session s) {
    s.transport.playing = true;
    ++s.transport.play_serial;
    return std::make_shared<const Session>(std::move(s));
}

Snapshot fixture(const char* name) {
    return playing(load_session(kFixtures / name));
}

Session one_track(const std::string& csv, TrackConfig track, double rate = 0.25) {
    Session s;
    s.dataset = std::make_shared<const Dataset>(parse_csv(csv, "probe"));
    s.dataset_path = "probe.csv";
    track.series = s.dataset->series()[0].name();
    s.tracks = {std::move(track)};
    s.transport.rate = rate;
    validate(s);
    return s;
}

const double kCentre = std::sqrt(0.5);

}  // namespace

TEST_CASE("a stopped session is silent") {
    auto s = std::make_shared<const Session>(load_session(kFixtures / "eeg_fm.json"));
    const auto run = render(s, 4096);
    for (const auto& f : run.frames) {
        REQUIRE(f.left == 0.0);
        REQUIRE(f.right == 0.0);
    }
}

TEST_CASE("all muted tracks are silent while playing") {
    const auto run = render(fixture("silent_muted.json"), 44100);
    for (const auto& f : run.frames) {
        REQUIRE(f.left == 0.0);
        REQUIRE(f.right == 0.0);
    }
    CHECK(run.reports.back().playing);
}

TEST_CASE("identical snapshots give identical output") {
    for (const char* name : {"eeg_discrete.json", "airquality_fm.json", "interleave4.json"}) {
        INFO(name);
        const auto s = fixture(name);
        const auto a = render(s, 44100);
        const auto b = render(s, 44100);
        CHECK(a.frames == b.frames);
    }
}

TEST_CASE("discrete trigger envelope peaks after the attack and is gone after the decay") {
    const auto run = render(fixture("adsr_pulse.json"), 22050);
    REQUIRE(run.triggers.size() == 1);
    CHECK(run.triggers[0].frame == 0);
    // square wave at 0.5, centre pan: |left| = 0.5 * gain * sqrt(1/2)
    auto gain = [&](std::size_t f) { return std::abs(run.frames[f].left) / (0.5 * kCentre); };
    std::size_t peak = 0;
    for (std::size_t f = 0; f < run.frames.size(); ++f) {
        if (gain(f) > gain(peak)) peak = f;
    }
    CHECK(peak == 441);
    CHECK(gain(441) == Approx(1.0).margin(1e-9));
    CHECK(gain(220) == Approx(220.0 / 441.0).margin(1e-9));
    CHECK(gain(441 + 4410) == Approx(0.5).margin(1e-9));
    CHECK(gain(9260) > 0.0);
    for (std::size_t f = 9261; f < run.frames.size(); ++f) REQUIRE(gain(f) == Approx(0.0).margin(1e-12));
}

TEST_CASE("continuous mode holds full gain after the attack") {
    TrackConfig t;
    t.source = OscillatorSource{Waveform::Square, 100.0, 0.5};
    const auto s = playing(one_track("v\n1\n1\n1\n1\n", t));
    const auto run = render(s, 44100);
    // four rows of 0.25 s; playback stops and releases at frame 44100
    for (std::size_t f = 441; f < 44100; ++f) {
        INFO("frame " << f);
        REQUIRE(std::abs(run.frames[f].left) == Approx(0.5 * kCentre).margin(1e-12));
    }
    CHECK(std::abs(run.frames[0].left) == 0.0);
}

TEST_CASE("ramp triggers land on their row boundaries") {
    const auto s = fixture("ramp_discrete.json");
    const auto run = render(s, 101 * 2205 + 64);
    REQUIRE(run.triggers.size() == 5);
    const std::size_t rows[] = {10, 30, 50, 70, 90};
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(run.triggers[k].row == rows[k]);
        CHECK(run.triggers[k].value == Approx(rows[k] / 10.0));
        // row r starts at r * 0.05 s
        CHECK(run.triggers[k].frame == rows[k] * 2205);
    }
    CHECK(run.reports.back().playing == false);
}

TEST_CASE("far-left speaker leaves the right channel silent") {
    TrackConfig t;
    t.pan = -1.0;
    const auto run = render(playing(one_track("v\n0\n1\n", t)), 22050);
    double left = 0.0;
    for (const auto& f : run.frames) {
        REQUIRE(std::abs(f.right) <= 1e-4);
        left = std::max(left, std::abs(f.left));
    }
    CHECK(left == Approx(0.5).margin(1e-3));
}

TEST_CASE("sine FM pair matches the closed form") {
    Session s = one_track("v\n0\n0\n", {}, 1.0);
    TrackConfig carrier = s.tracks[0];
    carrier.id = TrackId{0};
    carrier.source = OscillatorSource{Waveform::Sine, 750.0, 0.4};
    carrier.mappings = {};
    TrackConfig mod = carrier;
    mod.id = TrackId{1};
    mod.source = OscillatorSource{Waveform::Sine, 3000.0, 1.0};
    mod.mappings.modulation_index = ModulationIndexMapping{1.0, 0.0};
    s.tracks = {carrier, mod};
    s.links = {{TrackId{1}, TrackId{0}}};
    validate(s);
    const auto run = render(playing(s), 8192);
    const double sr = 44100.0;
    for (std::size_t n = 441; n < run.frames.size(); ++n) {
        const double expected = kCentre * fm_sample(750.0, 3000.0, 1.0, 0.4, n / sr);
        REQUIRE(run.frames[n].left == Approx(expected).margin(1e-6));
    }
}

TEST_CASE("modulators are not heard on their own") {
    auto s = load_session(kFixtures / "airquality_fm.json");
    for (auto& t : s.tracks) t.muted = std::find_if(s.links.begin(), s.links.end(), [&](const FmLink& l) {
                                          return l.carrier == t.id;
                                      }) != s.links.end();
    const auto run = render(playing(s), 8192);
    for (const auto& f : run.frames) {
        REQUIRE(f.left == 0.0);
        REQUIRE(f.right == 0.0);
    }
}

TEST_CASE("alias warnings flag carriers whose FM spectrum crosses Nyquist") {
    Renderer r;
    auto s = fixture("airquality_fm.json");
    render(r, s, 44100, [](std::uint64_t, Snapshot x) { return x; });
    CHECK(r.alias_warnings() > 0);

    Renderer quiet;
    const auto eeg = fixture("eeg_fm.json");
    render(quiet, eeg, 44100, [](std::uint64_t, Snapshot x) { return x; });
    CHECK(quiet.alias_warnings() == 0);
}

TEST_CASE("interleaved tracks sound one at a time") {
    const auto s = fixture("interleave4.json");
    const auto run = render(s, 2 * 35280);  // two rows of 0.8 s
    // slot k of row r spans [(4r + k) * 8820, (4r + k + 1) * 8820)
    for (const auto& report : run.reports) {
        const auto start = report.start_frame;
        const auto slot_frame = start % 8820;
        // skip blocks that could hold a release tail or the slot edge
        if (slot_frame < 1000 || slot_frame + 64 > 8820) continue;
        const auto slot = static_cast<std::size_t>((start / 8820) % 4);
        for (std::size_t k = 0; k < report.meters.size(); ++k) {
            INFO("frame " << start << " track " << k);
            if (k == slot) {
                CHECK(report.meters[k].sum_squares > 0.0);
            } else {
                CHECK(report.meters[k].sum_squares == 0.0);
            }
        }
    }
}

TEST_CASE("snapshots take effect at the block they are passed with") {
    const auto s = fixture("eeg_fm.json");
    auto muted = std::make_shared<const Session>(apply_update(*s, msg::Mute{TrackId{0}, true}, kFixtures));
    muted = std::make_shared<const Session>(apply_update(*muted, msg::Mute{TrackId{1}, true}, kFixtures));
    muted = std::make_shared<const Session>(apply_update(*muted, msg::Mute{TrackId{2}, true}, kFixtures));
    muted = std::make_shared<const Session>(apply_update(*muted, msg::Mute{TrackId{3}, true}, kFixtures));
    Renderer r;
    const auto run = render(r, s, 8192, [&](std::uint64_t f, Snapshot x) { return f >= 4096 ? muted : x; });
    CHECK(run.frames[4095].left != 0.0);
    for (std::size_t f = 4096; f < run.frames.size(); ++f) REQUIRE(run.frames[f].left == 0.0);
}

TEST_CASE("changing rate while playing keeps the cursor continuous") {
    const auto s = fixture("ramp_discrete.json");
    const auto slow = std::make_shared<const Session>(apply_update(*s, msg::SetRate{0.1}, kFixtures));
    Renderer r;
    const auto run = render(r, s, 44100, [&](std::uint64_t f, Snapshot x) { return f >= 22016 ? slow : x; });
    // the cursor reports the last rendered frame, 44159: 22016 frames at
    // 0.05 s per row, then 22143 at 0.1 s per row
    const double expected = 22016.0 / 2205.0 + 22143.0 / 4410.0;
    CHECK(r.transport().cursor == Approx(expected).margin(1e-9));
    CHECK(run.reports.back().cursor == Approx(expected).margin(1e-9));
}

TEST_CASE("stop then play resumes from the cursor; reset rewinds") {
    const auto s = fixture("ramp_discrete.json");
    const auto stopped = std::make_shared<const Session>(apply_update(*s, msg::Stop{}, kFixtures));
    const auto resumed = std::make_shared<const Session>(apply_update(*stopped, msg::Play{}, kFixtures));
    const auto rewound = std::make_shared<const Session>(apply_update(*resumed, msg::Reset{}, kFixtures));
    Renderer r;
    render(r, s, 22080, [&](std::uint64_t f, Snapshot x) {
        if (f >= 19200) return resumed;
        if (f >= 12800) return stopped;
        return x;
    });
    // stopped at 12800, resumed at 19200; last rendered frame is 22079
    CHECK(r.transport().cursor == Approx((12800.0 + 2879.0) / 2205.0).margin(1e-9));
    BlockReport report;
    std::vector<StereoFrame> buf(64);
    r.render_block(rewound, 22080, buf, report);
    CHECK(r.transport().cursor == Approx(63.0 / 2205.0).margin(1e-9));
}

TEST_CASE("playback stops at the end of the data") {
    const auto s = fixture("adsr_pulse.json");  // 4 rows at 0.25 s
    const auto run = render(s, 44100 + 4096);
    bool ended = false;
    for (const auto& report : run.reports) ended = ended || report.reached_end;
    CHECK(ended);
    CHECK_FALSE(run.reports.back().playing);
    CHECK(run.reports.back().cursor == 4.0);
}
