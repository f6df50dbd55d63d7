#include "sonify/synth.hpp"

#include <algorithm>
#include <cmath>

#include "sonify/wav.hpp"

namespace sonify {

std::string_view to_string(Waveform kind) noexcept {
    switch (kind) {
        case Waveform::Sine: return "sine";
        case Waveform::Square: return "square";
        case Waveform::Saw: return "saw";
        case Waveform::Triangle: return "triangle";
    }
    return "sine";
}

std::optional<Waveform> parse_waveform(std::string_view text) noexcept {
    if (text == "sine") return Waveform::Sine;
    if (text == "square") return Waveform::Square;
    if (text == "saw") return Waveform::Saw;
    if (text == "triangle") return Waveform::Triangle;
    return std::nullopt;
}

double osc_value(Waveform kind, double phase) noexcept {
    switch (kind) {
        case Waveform::Sine: return std::sin(kTwoPi * phase);
        case Waveform::Square: return phase < 0.5 ? 1.0 : -1.0;
        case Waveform::Saw: return 2.0 * phase - 1.0;
        case Waveform::Triangle: return 4.0 * std::abs(phase - 0.5) - 1.0;
    }
    return 0.0;
}

namespace {

double held_level(const Envelope& env, double t) noexcept {
    if (t < env.attack) {
        return t / env.attack;
    }
    const double into_decay = t - env.attack;
    if (into_decay < env.decay) {
        return 1.0 - (1.0 - env.sustain) * (into_decay / env.decay);
    }
    return env.sustain;
}

}  // namespace

double adsr_gain(const Envelope& env, double t_on, std::optional<double> t_off) noexcept {
    if (t_on < 0.0) {
        return 0.0;
    }
    if (!t_off) {
        return std::clamp(held_level(env, t_on), 0.0, 1.0);
    }
    const double since_off = std::clamp(*t_off, 0.0, t_on);
    if (since_off >= env.release) {
        return 0.0;
    }
    const double level = held_level(env, t_on - since_off);
    return std::clamp(level * (1.0 - since_off / env.release), 0.0, 1.0);
}

PanGains pan_gains(double x) noexcept {
    const double theta = (std::clamp(x, -1.0, 1.0) + 1.0) * kPi / 4.0;
    return {std::cos(theta), std::sin(theta)};
}

double fm_sample(double carrier_freq, double mod_freq, double mod_index, double carrier_amp, double t,
                 Waveform carrier, Waveform modulator) noexcept {
    const double mod = osc_value(modulator, wrap_phase(mod_freq * t));
    const double phase = wrap_phase(carrier_freq * t + mod_index * mod / kTwoPi);
    return carrier_amp * osc_value(carrier, phase);
}

bool fm_alias_risk(double carrier_freq, double mod_freq, double mod_index, double sample_rate) noexcept {
    return carrier_freq + std::abs(mod_index) * mod_freq >= sample_rate / 2.0;
}

std::shared_ptr<const SampleBuffer> load_sample(const std::filesystem::path& path) {
    WavData wav;
    try {
        wav = read_wav(path);
    } catch (const std::exception& e) {
        throw SampleLoadError("cannot load sample " + path.string() + ": " + e.what());
    }
    if (wav.channels == 0 || wav.frame_count() == 0) {
        throw SampleLoadError("sample " + path.string() + " contains no audio");
    }
    auto buffer = std::make_shared<SampleBuffer>();
    buffer->sample_rate = wav.sample_rate;
    buffer->frames.resize(wav.frame_count());
    for (std::size_t f = 0; f < buffer->frames.size(); ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < wav.channels; ++c) {
            acc += wav.samples[f * wav.channels + c];
        }
        buffer->frames[f] = static_cast<float>(acc / wav.channels);
    }
    return buffer;
}

double sample_voice(const SampleBuffer& sample, double speed, double amplitude, double t) noexcept {
    if (sample.frames.empty() || t < 0.0) {
        return 0.0;
    }
    const double pos = t * speed * sample.sample_rate;
    const auto last = static_cast<double>(sample.frames.size() - 1);
    if (pos > last) {
        return 0.0;
    }
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    const double a = sample.frames[i];
    const double b = frac > 0.0 ? sample.frames[i + 1] : a;
    return amplitude * (a + (b - a) * frac);
}

}  // namespace sonify
