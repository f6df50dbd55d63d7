// Command-line front end: offline render, spectral analysis, live server.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sonify/control_server.hpp"
#include "sonify/live_session.hpp"
#include "sonify/render_job.hpp"
#include "sonify/session_io.hpp"
#include "sonify/spectrum.hpp"
#include "sonify/wav.hpp"

namespace {

// Stable exit codes; documented in the README.
enum Exit : int { kOk = 0, kUsage = 1, kConfig = 2, kDataset = 3, kIo = 4, kFormat = 5 };

std::atomic<bool> g_interrupted{false};

void on_signal(int) {
    g_interrupted = true;
}

int fail(int code, const std::exception& e) {
    std::cerr << "sonify: " << e.what() << '\n';
    return code;
}

int run_render(const sonify::RenderJob& job) {
    try {
        const auto summary = sonify::render(job);
        const nlohmann::json out{{"frames", summary.frames},
                                 {"triggers", summary.triggers},
                                 {"peak", summary.peak},
                                 {"alias_warnings", summary.alias_warnings}};
        std::cout << out.dump() << '\n';
        return kOk;
    } catch (const sonify::ConfigError& e) {
        return fail(kConfig, e);
    } catch (const sonify::DatasetError& e) {
        return fail(kDataset, e);
    } catch (const sonify::IoError& e) {
        return fail(kIo, e);
    }
}

int run_analyze(const std::string& path, std::size_t window, std::size_t peaks) {
    try {
        const auto wav = sonify::read_wav(path);
        std::cout << sonify::to_json(sonify::analyze(wav, window, peaks)).dump(2) << '\n';
        return kOk;
    } catch (const sonify::IoError& e) {
        return fail(kIo, e);
    } catch (const sonify::WavFormatError& e) {
        return fail(kFormat, e);
    }
}

int run_serve(const std::optional<std::string>& config, const std::string& address, std::uint16_t port) {
    sonify::Session session;
    sonify::LiveSession::Options options;
    options.base_dir = std::filesystem::current_path();
    try {
        if (config) {
            session = sonify::load_session(*config);
            options.base_dir = std::filesystem::absolute(*config).parent_path();
        }
    } catch (const sonify::ConfigError& e) {
        return fail(kConfig, e);
    } catch (const sonify::DatasetError& e) {
        return fail(kDataset, e);
    }

    sonify::LiveSession live(std::move(session), options);
    sonify::ControlServer server(live, {address, port, true, 1.0});
    try {
        server.start();
    } catch (const std::system_error& e) {
        return fail(kIo, e);
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "sonify: listening on ws://" << address << ':' << server.port() << '\n';
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Data sonification engine"};
    app.require_subcommand(1);

    sonify::RenderJob job;
    std::string config;
    std::string output;
    std::optional<double> duration;
    std::optional<std::string> log;
    std::optional<double> sample_rate;
    auto* render = app.add_subcommand("render", "Render a session config to a 16-bit stereo WAV");
    render->add_option("config", config, "Session config (JSON)")->required();
    render->add_option("-o,--output", output, "Output WAV path")->required();
    render->add_option("--log", log, "Write discrete triggers as JSON lines");
    render->add_option("--duration", duration, "Render only the first N seconds");
    render->add_option("--sample-rate", sample_rate, "Override the session sample rate (Hz)");

    std::string wav_path;
    std::size_t window = 8192;
    std::size_t peaks = 10;
    auto* analyze = app.add_subcommand("analyze", "List spectral peaks of a WAV file per window");
    analyze->add_option("wav", wav_path, "Input WAV")->required();
    analyze->add_option("--window", window, "FFT window in frames")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
    analyze->add_option("--peaks", peaks, "Peaks reported per window");

    std::optional<std::string> serve_config;
    std::string address = "127.0.0.1";
    std::uint16_t port = 8765;
    auto* serve = app.add_subcommand("serve", "Host a live session over WebSocket");
    serve->add_option("config", serve_config, "Initial session config");
    serve->add_option("--address", address, "Listen address");
    serve->add_option("--port", port, "Listen port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    if (*render) {
        job.config = config;
        job.output = output;
        job.duration = duration;
        if (log) job.log = *log;
        job.sample_rate = sample_rate;
        return run_render(job);
    }
    if (*analyze) return run_analyze(wav_path, window, peaks);
    return run_serve(serve_config, address, port);
}
