#include "sonify/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

#include <numbers>

#include <fftw3.h>

namespace sonify {

namespace {

// FFTW's planner is not thread safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

double to_db(double magnitude) {
    return magnitude > 0.0 ? 20.0 * std::log10(magnitude) : -std::numeric_limits<double>::infinity();
}

}  // namespace

Spectrum magnitude_spectrum(std::span<const double> samples, std::size_t window, double sample_rate) {
    if (window < 2) throw std::invalid_argument("spectrum window must be at least 2 frames");

    const std::size_t bins = window / 2 + 1;
    double* in = fftw_alloc_real(window);
    fftw_complex* out = fftw_alloc_complex(bins);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(window), in, out, FFTW_ESTIMATE);
    }

    double window_sum = 0.0;
    for (std::size_t n = 0; n < window; ++n) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(window));
        window_sum += w;
        in[n] = n < samples.size() ? samples[n] * w : 0.0;
    }
    fftw_execute(plan);

    Spectrum s;
    s.sample_rate = sample_rate;
    s.window = window;
    s.magnitude.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        const double scale = (k == 0 || (window % 2 == 0 && k == bins - 1)) ? 1.0 : 2.0;
        s.magnitude[k] = scale * std::hypot(out[k][0], out[k][1]) / window_sum;
    }

    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(out);
    fftw_free(in);
    return s;
}

std::vector<SpectralPeak> find_peaks(const Spectrum& spectrum, std::size_t max_peaks, double floor_dbfs) {
    std::vector<SpectralPeak> peaks;
    const auto& m = spectrum.magnitude;
    const double floor = std::pow(10.0, floor_dbfs / 20.0);
    for (std::size_t k = 1; k + 1 < m.size(); ++k) {
        if (m[k] <= floor || m[k] <= m[k - 1] || m[k] < m[k + 1]) continue;
        // parabola through the log magnitudes of the three bins
        const double a = std::log(std::max(m[k - 1], 1e-300));
        const double b = std::log(m[k]);
        const double c = std::log(std::max(m[k + 1], 1e-300));
        const double denom = a - 2.0 * b + c;
        const double delta = denom != 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
        const double mag = std::exp(b - 0.25 * (a - c) * delta);
        peaks.push_back({(static_cast<double>(k) + delta) * spectrum.bin_width(), mag, to_db(mag)});
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const SpectralPeak& x, const SpectralPeak& y) { return x.magnitude > y.magnitude; });
    if (peaks.size() > max_peaks) peaks.resize(max_peaks);
    return peaks;
}

double magnitude_near(const Spectrum& spectrum, double frequency, double tolerance_hz) {
    const double bw = spectrum.bin_width();
    if (bw <= 0.0 || spectrum.magnitude.empty()) return 0.0;
    const auto last = static_cast<double>(spectrum.magnitude.size() - 1);
    const auto lo = static_cast<std::size_t>(std::clamp(std::ceil((frequency - tolerance_hz) / bw), 0.0, last));
    const auto hi = static_cast<std::size_t>(std::clamp(std::floor((frequency + tolerance_hz) / bw), 0.0, last));
    double best = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) best = std::max(best, spectrum.magnitude[k]);
    return best;
}

std::vector<double> mid_channel(const WavData& wav) {
    std::vector<double> mid(wav.frame_count());
    for (std::size_t f = 0; f < mid.size(); ++f) {
        double sum = 0.0;
        for (std::size_t c = 0; c < wav.channels; ++c) sum += wav.samples[f * wav.channels + c];
        mid[f] = sum / wav.channels;
    }
    return mid;
}

SpectralReport analyze(const WavData& wav, std::size_t window, std::size_t max_peaks) {
    const auto mid = mid_channel(wav);
    SpectralReport report;
    report.sample_rate = wav.sample_rate;
    report.window = window;
    const std::span<const double> all(mid);
    std::size_t start = 0;
    do {
        const auto n = std::min(window, mid.size() - start);
        const auto spectrum = magnitude_spectrum(all.subspan(start, n), window, wav.sample_rate);
        report.windows.push_back({start, find_peaks(spectrum, max_peaks)});
        start += window;
    } while (start + window <= mid.size());
    return report;
}

nlohmann::json to_json(const SpectralReport& report) {
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : report.windows) {
        nlohmann::json peaks = nlohmann::json::array();
        for (const auto& p : w.peaks) {
            peaks.push_back({{"frequency", p.frequency}, {"magnitude", p.magnitude}, {"dbfs", p.dbfs}});
        }
        windows.push_back({{"start_frame", w.start_frame}, {"peaks", std::move(peaks)}});
    }
    return {{"sample_rate", report.sample_rate},
            {"window", report.window},
            {"bin_width", report.window ? report.sample_rate / static_cast<double>(report.window) : 0.0},
            {"windows", std::move(windows)}};
}

}  // namespace sonify
