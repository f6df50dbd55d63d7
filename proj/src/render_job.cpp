#include "sonify/render_job.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sonify/session_io.hpp"
#include "sonify/update.hpp"
#include "sonify/wav.hpp"

namespace sonify {

std::uint64_t frames_for_seconds(double seconds, double sample_rate, std::size_t block_size) {
    // The epsilon keeps 60.0 s * 44100 from rounding up a whole extra frame.
    const double exact = seconds * sample_rate;
    auto frames = static_cast<std::uint64_t>(std::max(0.0, std::ceil(exact - 1e-6)));
    const auto block = static_cast<std::uint64_t>(std::max<std::size_t>(block_size, 1));
    return (frames + block - 1) / block * block;
}

std::uint64_t play_frames(const Session& session) {
    return frames_for_seconds(session.total_play_seconds(), session.sample_rate, session.block_size);
}

Session with_play_request(Session session) {
    session.transport.playing = true;
    ++session.transport.play_serial;
    return session;
}

OfflineRender render_offline(const Session& session, std::uint64_t frames, std::span<const TimedMessage> timeline,
                             const std::filesystem::path& base_dir) {
    OfflineRender result;
    auto current = std::make_shared<const Session>(session);
    Renderer renderer;
    const std::size_t block = std::max<std::size_t>(session.block_size, 1);
    std::vector<StereoFrame> buffer(block);
    BlockReport report;
    std::size_t next = 0;

    result.pcm.reserve(static_cast<std::size_t>(frames) * 2);
    for (std::uint64_t start = 0; start < frames; start += block) {
        while (next < timeline.size() && timeline[next].frame <= start) {
            try {
                current = std::make_shared<const Session>(apply_update(*current, timeline[next].message, base_dir));
            } catch (const ValidationError&) {
            }
            ++next;
        }
        const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(block, frames - start));
        renderer.render_block(current, start, std::span(buffer).first(n), report);
        for (std::size_t i = 0; i < n; ++i) {
            result.peak = std::max({result.peak, std::abs(buffer[i].left), std::abs(buffer[i].right)});
            result.pcm.push_back(to_pcm16(buffer[i].left));
            result.pcm.push_back(to_pcm16(buffer[i].right));
        }
        result.triggers.insert(result.triggers.end(), report.triggers.begin(), report.triggers.end());
    }
    result.frames = frames;
    result.alias_warnings = renderer.alias_warnings();
    return result;
}

RenderSummary render(const RenderJob& job) {
    Session session = load_session(job.config);
    if (job.sample_rate) {
        session.sample_rate = *job.sample_rate;
        try {
            validate(session);
        } catch (const ValidationError& e) {
            throw ConfigError(e.what());
        }
    }

    const auto full = play_frames(session);
    auto frames = full;
    if (job.duration) {
        if (!(*job.duration >= 0.0)) throw ConfigError("duration must be non-negative");
        frames = frames_for_seconds(*job.duration, session.sample_rate, session.block_size);
        if (frames > full) {
            throw ConfigError("duration " + std::to_string(*job.duration) + " s exceeds the full play time of " +
                              std::to_string(session.total_play_seconds()) + " s");
        }
    }

    const auto out_dir = job.output.parent_path();
    if (!out_dir.empty() && !std::filesystem::is_directory(out_dir)) {
        throw IoError("output directory " + out_dir.string() + " does not exist");
    }

    const double sample_rate = session.sample_rate;
    const auto result = render_offline(with_play_request(std::move(session)), frames);
    write_wav16(job.output, result.pcm, 2, static_cast<std::uint32_t>(std::lround(sample_rate)));

    if (job.log) {
        std::ofstream log(*job.log, std::ios::binary);
        if (!log) throw IoError("cannot write event log " + job.log->string());
        for (const auto& t : result.triggers) {
            const nlohmann::json line{{"time", static_cast<double>(t.frame) / sample_rate},
                                      {"track", t.track.value},
                                      {"row", t.row},
                                      {"value", t.value}};
            log << line.dump() << '\n';
        }
        if (!log) throw IoError("failed writing event log " + job.log->string());
    }
    return {result.frames, result.triggers.size(), result.peak, result.alias_warnings};
}

}  // namespace sonify
