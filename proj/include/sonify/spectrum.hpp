#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sonify/wav.hpp"

namespace sonify {

/// Single-sided magnitude spectrum of a Hann-windowed block, scaled so that a
/// full-scale sine centred on a bin reads 1.0.
struct Spectrum {
    double sample_rate = 0.0;
    std::size_t window = 0;
    std::vector<double> magnitude;  ///< window/2 + 1 bins

    double bin_width() const noexcept { return window ? sample_rate / static_cast<double>(window) : 0.0; }
};

struct SpectralPeak {
    double frequency = 0.0;  ///< parabolic interpolation between bins
    double magnitude = 0.0;
    double dbfs = 0.0;
};

struct SpectrumWindow {
    std::size_t start_frame = 0;
    std::vector<SpectralPeak> peaks;  ///< strongest first
};

struct SpectralReport {
    double sample_rate = 0.0;
    std::size_t window = 0;
    std::vector<SpectrumWindow> windows;
};

inline constexpr double kPeakFloorDbfs = -90.0;

/// Zero-pads when there are fewer samples than `window`.
Spectrum magnitude_spectrum(std::span<const double> samples, std::size_t window, double sample_rate);

/// Local maxima above floor_dbfs, strongest first, at most max_peaks.
std::vector<SpectralPeak> find_peaks(const Spectrum& spectrum, std::size_t max_peaks = 10,
                                     double floor_dbfs = kPeakFloorDbfs);

/// Largest bin magnitude within +-tolerance_hz of frequency.
double magnitude_near(const Spectrum& spectrum, double frequency, double tolerance_hz);

/// Mid channel ((L+R)/2 for stereo), consecutive non-overlapping windows; a
/// trailing partial window is dropped unless it is the only one.
std::vector<double> mid_channel(const WavData& wav);
SpectralReport analyze(const WavData& wav, std::size_t window, std::size_t max_peaks = 10);

nlohmann::json to_json(const SpectralReport& report);

}  // namespace sonify
