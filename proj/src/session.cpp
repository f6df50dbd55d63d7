#include "sonify/session.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace sonify {

namespace {

std::string track_label(TrackId id) {
    return "track " + std::to_string(id.value);
}

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ValidationError(message);
    }
}

bool finite(double v) {
    return std::isfinite(v);
}

void check_envelope(const Envelope& env, const std::string& where) {
    require(finite(env.attack) && env.attack >= 0.0, where + ": attack must be >= 0");
    require(finite(env.decay) && env.decay >= 0.0, where + ": decay must be >= 0");
    require(finite(env.release) && env.release >= 0.0, where + ": release must be >= 0");
    require(finite(env.sustain) && env.sustain >= 0.0 && env.sustain <= 1.0, where + ": sustain must be in [0, 1]");
}

void check_track(const Session& session, const TrackConfig& track) {
    const std::string where = track_label(track.id);
    const double nyquist = session.sample_rate / 2.0;
    require(session.dataset && session.dataset->index_of(track.series).has_value(),
            where + ": unknown series '" + track.series + "'");

    if (const auto* osc = std::get_if<OscillatorSource>(&track.source)) {
        require(finite(osc->frequency) && osc->frequency > 0.0 && osc->frequency < nyquist,
                where + ": oscillator frequency must be in (0, Nyquist)");
        require(finite(osc->amplitude) && osc->amplitude >= 0.0 && osc->amplitude <= 1.0,
                where + ": amplitude must be in [0, 1]");
    } else {
        const auto& sample = std::get<SampleSource>(track.source);
        require(finite(sample.speed) && sample.speed > 0.0, where + ": sample speed must be > 0");
        require(finite(sample.amplitude) && sample.amplitude >= 0.0 && sample.amplitude <= 1.0,
                where + ": amplitude must be in [0, 1]");
        require(sample.buffer != nullptr, where + ": sample '" + sample.file + "' is not loaded");
    }

    if (const auto& f = track.mappings.frequency) {
        require(finite(f->f_min) && f->f_min > 0.0, where + ": frequency mapping minimum must be > 0");
        require(finite(f->f_range) && f->f_range >= 0.0, where + ": frequency range must be >= 0");
        require(f->f_min + f->f_range < nyquist, where + ": mapped frequencies must stay below Nyquist");
    }
    if (const auto& m = track.mappings.modulation_index) {
        require(finite(m->i_min) && m->i_min >= 0.0, where + ": modulation index minimum must be >= 0");
        require(finite(m->i_range) && m->i_range >= 0.0, where + ": modulation index range must be >= 0");
    }
    check_envelope(track.continuous_envelope, where + " continuous envelope");
    check_envelope(track.discrete_envelope, where + " discrete envelope");
    require(finite(track.pan) && track.pan >= -1.0 && track.pan <= 1.0, where + ": pan must be in [-1, 1]");
    if (track.discrete) {
        require(finite(track.discrete->threshold) && finite(track.discrete->increment) &&
                    finite(track.discrete->current_threshold),
                where + ": discrete rule values must be finite");
    }
}

}  // namespace

double source_amplitude(const SoundSource& source) noexcept {
    return std::visit([](const auto& s) { return s.amplitude; }, source);
}

std::string_view to_string(PlayMode mode) noexcept {
    return mode == PlayMode::Continuous ? "continuous" : "discrete";
}

std::optional<PlayMode> parse_play_mode(std::string_view text) noexcept {
    if (text == "continuous") return PlayMode::Continuous;
    if (text == "discrete") return PlayMode::Discrete;
    return std::nullopt;
}

double TransportSettings::row_period() const noexcept {
    if (interleave_enabled && !interleave_set.empty()) {
        return rate * static_cast<double>(interleave_set.size());
    }
    return rate;
}

const TrackConfig* Session::find_track(TrackId id) const noexcept {
    for (const auto& t : tracks) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

TrackConfig* Session::find_track(TrackId id) noexcept {
    for (auto& t : tracks) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

std::optional<std::size_t> Session::track_index(TrackId id) const noexcept {
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (tracks[i].id == id) return i;
    }
    return std::nullopt;
}

double Session::total_play_seconds() const noexcept {
    return static_cast<double>(length()) * transport.row_period();
}

bool creates_cycle(const std::vector<FmLink>& links, const FmLink& link) {
    if (link.modulator == link.carrier) {
        return true;
    }
    // the new edge closes a cycle iff the modulator is reachable from the carrier
    std::vector<TrackId> stack{link.carrier};
    std::unordered_set<TrackId> seen;
    while (!stack.empty()) {
        const TrackId at = stack.back();
        stack.pop_back();
        if (at == link.modulator) {
            return true;
        }
        if (!seen.insert(at).second) {
            continue;
        }
        for (const auto& l : links) {
            if (l.modulator == at) {
                stack.push_back(l.carrier);
            }
        }
    }
    return false;
}

std::vector<std::size_t> fm_render_order(const Session& session) {
    const std::size_t n = session.tracks.size();
    std::vector<std::size_t> indegree(n, 0);
    std::vector<std::vector<std::size_t>> out(n);
    for (const auto& link : session.links) {
        const auto m = session.track_index(link.modulator);
        const auto c = session.track_index(link.carrier);
        require(m && c, "FM link refers to an unknown track");
        out[*m].push_back(*c);
        ++indegree[*c];
    }
    // Kahn's algorithm, always taking the lowest ready index
    std::set<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) ready.insert(i);
    }
    std::vector<std::size_t> order;
    order.reserve(n);
    while (!ready.empty()) {
        const std::size_t i = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(i);
        for (const std::size_t c : out[i]) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    require(order.size() == n, "FM links form a cycle");
    return order;
}

void validate(const Session& session) {
    require(finite(session.sample_rate) && session.sample_rate >= 1000.0, "sample rate must be >= 1000 Hz");
    require(session.block_size >= 1 && session.block_size <= 65536, "block size must be in [1, 65536]");
    require(finite(session.transport.rate) && session.transport.rate > 0.0, "play rate must be > 0");
    require(session.dataset || session.tracks.empty(), "tracks configured without a dataset");

    std::unordered_set<TrackId> ids;
    for (const auto& track : session.tracks) {
        require(ids.insert(track.id).second, "duplicate " + track_label(track.id));
        check_track(session, track);
    }

    std::vector<FmLink> accepted;
    for (const auto& link : session.links) {
        const auto* mod = session.find_track(link.modulator);
        const auto* car = session.find_track(link.carrier);
        require(mod != nullptr, "FM link modulator " + track_label(link.modulator) + " does not exist");
        require(car != nullptr, "FM link carrier " + track_label(link.carrier) + " does not exist");
        require(link.modulator != link.carrier, "a track cannot modulate itself");
        require(is_oscillator(mod->source) && is_oscillator(car->source),
                "FM links require oscillator sources on both ends");
        require(std::find(accepted.begin(), accepted.end(), link) == accepted.end(), "duplicate FM link");
        require(!creates_cycle(accepted, link), "FM link " + track_label(link.modulator) + " -> " +
                                                    track_label(link.carrier) + " would create a cycle");
        accepted.push_back(link);
    }

    const auto& tr = session.transport;
    if (tr.interleave_enabled) {
        require(!tr.interleave_set.empty(), "interleave needs at least one track");
    }
    std::unordered_set<TrackId> in_set;
    for (const auto id : tr.interleave_set) {
        require(session.find_track(id) != nullptr, "interleave set refers to unknown " + track_label(id));
        require(in_set.insert(id).second, "interleave set lists " + track_label(id) + " twice");
    }
}

std::vector<TrackConfig> default_tracks(const Dataset& dataset) {
    std::vector<TrackConfig> tracks;
    for (std::size_t i = 0; i < dataset.series().size(); ++i) {
        TrackConfig t;
        t.id = TrackId{static_cast<std::uint32_t>(i)};
        t.series = dataset.series()[i].name();
        t.mappings.frequency = FrequencyMapping{};
        tracks.push_back(std::move(t));
    }
    return tracks;
}

DiscreteRule default_discrete_rule(const AttributeSeries& series) {
    return DiscreteRule::starting_at((series.min() + series.max()) / 2.0, 0.0);
}

}  // namespace sonify
