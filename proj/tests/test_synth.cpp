#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <random>

#include "sonify/synth.hpp"
#include "sonify/wav.hpp"

using namespace sonify;
using Catch::Approx;

namespace {
const std::filesystem::path kFixtures = SONIFY_FIXTURES_DIR;
}

TEST_CASE("waveform reference points") {
    CHECK(osc_value(Waveform::Sine, 0.0) == 0.0);
    CHECK(osc_value(Waveform::Sine, 0.25) == Approx(1.0));
    CHECK(osc_value(Waveform::Square, 0.25) == 1.0);
    CHECK(osc_value(Waveform::Square, 0.75) == -1.0);
    CHECK(osc_value(Waveform::Saw, 0.0) == -1.0);
    CHECK(osc_value(Waveform::Saw, 0.5) == 0.0);
    CHECK(osc_value(Waveform::Triangle, 0.0) == 1.0);
    CHECK(osc_value(Waveform::Triangle, 0.5) == -1.0);
    CHECK(osc_value(Waveform::Triangle, 0.25) == Approx(0.0).margin(1e-15));
}

TEST_CASE("waveforms stay within unit amplitude") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> phase(0.0, 1.0);
    std::uniform_int_distribution<int> kind(0, 3);
    double worst = 0.0;
    for (int i = 0; i < 1'000'000; ++i) {
        worst = std::max(worst, std::abs(osc_value(static_cast<Waveform>(kind(rng)), phase(rng))));
    }
    CHECK(worst <= 1.0);
}

TEST_CASE("waveform names round trip") {
    for (auto w : {Waveform::Sine, Waveform::Square, Waveform::Saw, Waveform::Triangle}) {
        CHECK(parse_waveform(to_string(w)) == w);
    }
    CHECK_FALSE(parse_waveform("noise"));
}

TEST_CASE("wrap_phase") {
    CHECK(wrap_phase(1.25) == Approx(0.25));
    CHECK(wrap_phase(-0.25) == Approx(0.75));
    CHECK(wrap_phase(0.0) == 0.0);
    CHECK(wrap_phase(-3.0) == 0.0);
}

TEST_CASE("discrete default envelope") {
    const Envelope env = kDiscreteEnvelope;
    CHECK(adsr_gain(env, 0.0) == 0.0);
    CHECK(adsr_gain(env, 0.005) == Approx(0.5));
    CHECK(adsr_gain(env, 0.01) == Approx(1.0));
    CHECK(adsr_gain(env, 0.11) == Approx(0.5));
    CHECK(adsr_gain(env, 0.21) == Approx(0.0).margin(1e-12));
    CHECK(adsr_gain(env, 5.0) == 0.0);
}

TEST_CASE("continuous default envelope holds full gain") {
    const Envelope env = kContinuousEnvelope;
    CHECK(adsr_gain(env, 0.01) == Approx(1.0));
    CHECK(adsr_gain(env, 0.5) == 1.0);
    CHECK(adsr_gain(env, 1000.0) == 1.0);
}

TEST_CASE("release ramps from the level at note-off") {
    const Envelope env{0.1, 0.1, 0.5, 0.2};
    // released during the attack, at gain 0.5
    CHECK(adsr_gain(env, 0.05, 0.0) == Approx(0.5));
    CHECK(adsr_gain(env, 0.15, 0.1) == Approx(0.25));
    CHECK(adsr_gain(env, 0.25, 0.2) == Approx(0.0).margin(1e-12));
    // released while sustaining
    CHECK(adsr_gain(env, 1.1, 0.1) == Approx(0.25));
    CHECK(adsr_gain(env, 2.0, 1.0) == 0.0);
}

TEST_CASE("zero-length segments") {
    const Envelope env{0.0, 0.0, 0.7, 0.0};
    CHECK(adsr_gain(env, 0.0) == Approx(0.7));
    CHECK(adsr_gain(env, 1.0) == Approx(0.7));
    CHECK(adsr_gain(env, 1.0, 0.0) == 0.0);
}

TEST_CASE("adsr gain is continuous frame to frame") {
    const double sr = 44100.0;
    for (const Envelope env : {kDiscreteEnvelope, kContinuousEnvelope, Envelope{0.05, 0.1, 0.3, 0.1}}) {
        const double limit = (1.0 / std::max(env.attack, 1e-9)) / sr + 1e-9;
        const std::size_t off = 20000;
        double prev = adsr_gain(env, 0.0);
        for (std::size_t f = 1; f < 30000; ++f) {
            const double t = f / sr;
            const double g = f < off ? adsr_gain(env, t) : adsr_gain(env, t, (f - off) / sr);
            CHECK(std::abs(g - prev) <= limit);
            CHECK(g >= 0.0);
            CHECK(g <= 1.0);
            prev = g;
        }
    }
}

TEST_CASE("pan law reference points") {
    const auto c = pan_gains(0.0);
    CHECK(c.left == Approx(std::sqrt(0.5)));
    CHECK(c.right == Approx(std::sqrt(0.5)));
    const auto l = pan_gains(-1.0);
    CHECK(l.left == 1.0);
    CHECK(std::abs(l.right) < 1e-15);
    const auto r = pan_gains(0.5);
    CHECK(r.left == Approx(std::cos(3 * kPi / 8)));
    CHECK(r.right == Approx(std::sin(3 * kPi / 8)));
    CHECK(r.left == Approx(0.3827).margin(1e-4));
    CHECK(r.right == Approx(0.9239).margin(1e-4));
}

TEST_CASE("pan law is equal power") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> pos(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const auto g = pan_gains(pos(rng));
        CHECK(std::abs(g.left * g.left + g.right * g.right - 1.0) <= 1e-9);
    }
}

TEST_CASE("fm_sample matches the closed form") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> t(0.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = t(rng);
        const double expected = 0.7 * std::sin(2 * kPi * 750 * x + 1.5 * std::sin(2 * kPi * 3000 * x));
        CHECK(fm_sample(750, 3000, 1.5, 0.7, x) == Approx(expected).margin(1e-7));
    }
}

TEST_CASE("fm with zero index is the bare carrier") {
    for (int n = 0; n < 1000; ++n) {
        const double x = n / 44100.0;
        CHECK(fm_sample(750, 3000, 0.0, 1.0, x) == Approx(std::sin(2 * kPi * 750 * x)).margin(1e-9));
        CHECK(fm_sample(750, 3000, 2.0, 0.0, x) == 0.0);
    }
}

TEST_CASE("fm alias estimate") {
    CHECK_FALSE(fm_alias_risk(750, 3000, 5, 44100));
    CHECK(fm_alias_risk(1500, 4500, 5, 44100));
}

TEST_CASE("sample voice interpolates and stops at the end") {
    SampleBuffer buf;
    buf.sample_rate = 10.0;
    buf.frames = {0.0f, 1.0f, 0.0f, -1.0f};
    CHECK(sample_voice(buf, 1.0, 1.0, 0.1) == Approx(1.0));
    CHECK(sample_voice(buf, 1.0, 1.0, 0.05) == Approx(0.5));
    CHECK(sample_voice(buf, 1.0, 0.5, 0.1) == Approx(0.5));
    CHECK(sample_voice(buf, 2.0, 1.0, 0.15) == Approx(-1.0));  // index 3
    CHECK(sample_voice(buf, 1.0, 1.0, 0.5) == 0.0);
    CHECK(sample_voice(buf, 1.0, 1.0, -0.1) == 0.0);
    CHECK(sample_voice(buf, 1.0, 0.0, 0.1) == 0.0);
}

TEST_CASE("sample speed two halves duration") {
    const auto buf = load_sample(kFixtures / "click.wav");
    const double d = buf->duration();
    // double speed is the same waveform compressed in time: half as long, an octave up
    for (int n = 0; n < 2000; ++n) {
        const double t = n / 44100.0;
        CHECK(sample_voice(*buf, 2.0, 1.0, t) == Approx(sample_voice(*buf, 1.0, 1.0, 2.0 * t)).margin(1e-7));
    }
    // a quarter period past the midpoint, where the 1 kHz tone peaks
    const double probe = d / 2.0 + 0.25e-3;
    CHECK(sample_voice(*buf, 2.0, 1.0, probe) == 0.0);
    CHECK(sample_voice(*buf, 1.0, 1.0, probe) != 0.0);
}

TEST_CASE("click fixture loads as mono") {
    const auto buf = load_sample(kFixtures / "click.wav");
    CHECK(buf->sample_rate == 22050.0);
    CHECK(buf->duration() == Approx(0.05).margin(1e-3));
    CHECK_THROWS_AS(load_sample(kFixtures / "missing.wav"), SampleLoadError);
    CHECK_THROWS_AS(load_sample(kFixtures / "ramp.csv"), SampleLoadError);
}

TEST_CASE("stereo samples are downmixed") {
    const auto path = std::filesystem::temp_directory_path() / "stereo_probe.wav";
    const std::vector<std::int16_t> pcm{16384, 0, -16384, -16384};
    write_wav16(path, pcm, 2, 8000);
    const auto buf = load_sample(path);
    REQUIRE(buf->frames.size() == 2);
    CHECK(buf->frames[0] == Approx(0.25).margin(1e-4));
    CHECK(buf->frames[1] == Approx(-0.5).margin(1e-4));
    std::filesystem::remove(path);
}
