#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace sonify {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class Waveform { Sine, Square, Saw, Triangle };

std::string_view to_string(Waveform kind) noexcept;
std::optional<Waveform> parse_waveform(std::string_view text) noexcept;

/// Naive (non band-limited) waveforms over one period, phase in [0, 1).
///   Sine     sin(2*pi*phase)
///   Square   +1 on the first half period, -1 on the second
///   Saw      rises from -1 to +1
///   Triangle +1 at phase 0, trough of -1 at phase 0.5
double osc_value(Waveform kind, double phase) noexcept;

/// Fractional part in [0, 1), also for negative input.
inline double wrap_phase(double phase) noexcept {
    const double f = phase - static_cast<double>(static_cast<long long>(phase));
    return f < 0.0 ? f + 1.0 : f;
}

/// Linear ADSR. Times are in seconds, sustain is a level.
struct Envelope {
    double attack = 0.01;
    double decay = 0.2;
    double sustain = 1.0;
    double release = 0.01;

    friend bool operator==(const Envelope&, const Envelope&) = default;
};

inline constexpr Envelope kContinuousEnvelope{0.01, 0.2, 1.0, 0.01};
inline constexpr Envelope kDiscreteEnvelope{0.01, 0.2, 0.0, 0.01};

/// Gain at `t_on` seconds after note-on. When `t_off` is set the note was
/// released `t_off` seconds ago (t_off <= t_on) and the gain ramps from its
/// level at release time down to zero over the release segment.
double adsr_gain(const Envelope& env, double t_on, std::optional<double> t_off = std::nullopt) noexcept;

struct PanGains {
    double left = 0.0;
    double right = 0.0;
};

/// Equal-power law for a speaker at x in [-1, 1] (clamped): left at -1.
PanGains pan_gains(double x) noexcept;

/// Phase-modulation FM evaluated at absolute time t:
///   carrier_amp * osc(carrier, frac(fc*t + index*osc(modulator, frac(fm*t)) / 2pi))
/// which for sine/sine is carrier_amp * sin(2pi*fc*t + index*sin(2pi*fm*t)).
double fm_sample(double carrier_freq, double mod_freq, double mod_index, double carrier_amp, double t,
                 Waveform carrier = Waveform::Sine, Waveform modulator = Waveform::Sine) noexcept;

/// Carson-style estimate of the highest significant partial, fc + index*fm,
/// against the Nyquist frequency. True means audible aliasing is likely.
bool fm_alias_risk(double carrier_freq, double mod_freq, double mod_index, double sample_rate) noexcept;

/// Decoded mono sample data for sample-playback voices.
struct SampleBuffer {
    std::vector<float> frames;
    double sample_rate = 44100.0;

    double duration() const noexcept { return static_cast<double>(frames.size()) / sample_rate; }
};

class SampleLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Loads a WAV file and downmixes it to mono. Throws SampleLoadError.
std::shared_ptr<const SampleBuffer> load_sample(const std::filesystem::path& path);

/// amplitude * source[t * speed * source_rate] with linear interpolation;
/// zero before the start and after the last frame.
double sample_voice(const SampleBuffer& sample, double speed, double amplitude, double t) noexcept;

}  // namespace sonify
