#include "sonify/update.hpp"

#include <algorithm>

#include "sonify/session_io.hpp"

namespace sonify {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

TrackConfig& track_or_throw(Session& s, TrackId id) {
    auto* t = s.find_track(id);
    if (t == nullptr) {
        throw ValidationError("unknown track " + std::to_string(id.value));
    }
    return *t;
}

}  // namespace

Session apply_update(const Session& current, const ClientMessage& update, const std::filesystem::path& base_dir) {
    Session next = current;

    std::visit(
        overloaded{
            [&](const msg::LoadDataset& m) {
                std::shared_ptr<const Dataset> dataset;
                try {
                    dataset = std::make_shared<const Dataset>(
                        load_dataset(resolve_path(m.path, base_dir), DataFormat::Csv, next.color_seed));
                } catch (const DatasetError& e) {
                    throw ValidationError(e.what());
                }
                next.dataset = std::move(dataset);
                next.dataset_path = m.path;
                if (m.normalization) next.normalization = *m.normalization;
                next.tracks = default_tracks(*next.dataset);
                next.links.clear();
                next.transport.interleave_enabled = false;
                next.transport.interleave_set.clear();
                next.transport.playing = false;
                ++next.transport.reset_serial;
            },
            [&](const msg::SetNormalization& m) { next.normalization = m.method; },
            [&](const msg::Play&) {
                next.transport.playing = true;
                ++next.transport.play_serial;
            },
            [&](const msg::Stop&) { next.transport.playing = false; },
            [&](const msg::Reset&) { ++next.transport.reset_serial; },
            [&](const msg::SetRate& m) { next.transport.rate = m.rate; },
            [&](const msg::Mute& m) { track_or_throw(next, m.track).muted = m.muted; },
            [&](const msg::SetSource& m) {
                auto& t = track_or_throw(next, m.track);
                t.source = m.source;
                if (auto* sample = std::get_if<SampleSource>(&t.source); sample && !sample->buffer) {
                    try {
                        sample->buffer = load_sample(resolve_path(sample->file, base_dir));
                    } catch (const SampleLoadError& e) {
                        throw ValidationError(e.what());
                    }
                }
            },
            [&](const msg::SetMapping& m) {
                auto& mappings = track_or_throw(next, m.track).mappings;
                switch (m.target) {
                    case msg::MappingKind::Frequency:
                        mappings.frequency = m.enabled ? std::optional(FrequencyMapping{m.min, m.range}) : std::nullopt;
                        break;
                    case msg::MappingKind::Amplitude: mappings.amplitude = m.enabled; break;
                    case msg::MappingKind::ModulationIndex:
                        mappings.modulation_index =
                            m.enabled ? std::optional(ModulationIndexMapping{m.min, m.range}) : std::nullopt;
                        break;
                }
            },
            [&](const msg::SetEnvelope& m) { track_or_throw(next, m.track).envelope() = m.envelope; },
            [&](const msg::SetMode& m) {
                auto& t = track_or_throw(next, m.track);
                t.mode = m.mode;
                if (m.mode == PlayMode::Discrete && !t.discrete && next.dataset) {
                    if (const auto idx = next.dataset->index_of(t.series)) {
                        t.discrete = default_discrete_rule(next.dataset->series()[*idx]);
                    }
                }
            },
            [&](const msg::SetDiscreteRule& m) {
                track_or_throw(next, m.track).discrete = DiscreteRule::starting_at(m.threshold, m.increment);
            },
            [&](const msg::AddFmLink& m) { next.links.push_back(m.link); },
            [&](const msg::RemoveFmLink& m) {
                const auto it = std::find(next.links.begin(), next.links.end(), m.link);
                if (it == next.links.end()) {
                    throw ValidationError("no FM link " + std::to_string(m.link.modulator.value) + " -> " +
                                          std::to_string(m.link.carrier.value));
                }
                next.links.erase(it);
            },
            [&](const msg::MoveSpeaker& m) { track_or_throw(next, m.track).pan = m.x; },
            [&](const msg::SetInterleave& m) {
                if (m.enabled && m.tracks.empty()) {
                    throw ValidationError("interleave needs at least one track");
                }
                next.transport.interleave_enabled = m.enabled;
                next.transport.interleave_set = m.tracks;
            },
        },
        update);

    validate(next);
    ++next.revision;
    return next;
}

}  // namespace sonify
