#include "sonify/session_io.hpp"

#include <fstream>

#include "json_util.hpp"

namespace sonify {

using nlohmann::json;
namespace ju = json_util;

json to_json(const Envelope& env) {
    return {{"attack", env.attack}, {"decay", env.decay}, {"sustain", env.sustain}, {"release", env.release}};
}

Envelope envelope_from_json(const json& j) {
    ju::expect_object(j, "envelope");
    ju::allow_only(j, {"attack", "decay", "sustain", "release"}, "envelope");
    Envelope env;
    env.attack = ju::number(j, "attack");
    env.decay = ju::number(j, "decay");
    env.sustain = ju::number(j, "sustain");
    env.release = ju::number(j, "release");
    return env;
}

json to_json(const SoundSource& source) {
    if (const auto* osc = std::get_if<OscillatorSource>(&source)) {
        return {{"type", "oscillator"},
                {"waveform", to_string(osc->waveform)},
                {"frequency", osc->frequency},
                {"amplitude", osc->amplitude}};
    }
    const auto& s = std::get<SampleSource>(source);
    return {{"type", "sample"}, {"file", s.file}, {"speed", s.speed}, {"amplitude", s.amplitude}};
}

SoundSource source_from_json(const json& j) {
    ju::expect_object(j, "source");
    const auto type = ju::string(ju::field(j, "type"), "type");
    if (type == "oscillator") {
        ju::allow_only(j, {"type", "waveform", "frequency", "amplitude"}, "oscillator source");
        OscillatorSource osc;
        if (j.contains("waveform")) {
            osc.waveform = ju::enum_field(j["waveform"], "waveform", parse_waveform);
        }
        osc.frequency = ju::number_or(j, "frequency", osc.frequency);
        osc.amplitude = ju::number_or(j, "amplitude", osc.amplitude);
        return osc;
    }
    if (type == "sample") {
        ju::allow_only(j, {"type", "file", "speed", "amplitude"}, "sample source");
        SampleSource s;
        s.file = ju::string(ju::field(j, "file"), "file");
        s.speed = ju::number_or(j, "speed", s.speed);
        s.amplitude = ju::number_or(j, "amplitude", s.amplitude);
        return s;
    }
    throw SchemaError("source type must be 'oscillator' or 'sample', got '" + type + "'");
}

json to_json(const Mappings& m) {
    json j = json::object();
    if (m.frequency) {
        j["frequency"] = {{"min", m.frequency->f_min}, {"range", m.frequency->f_range}};
    }
    if (m.amplitude) {
        j["amplitude"] = true;
    }
    if (m.modulation_index) {
        j["modulation_index"] = {{"min", m.modulation_index->i_min}, {"range", m.modulation_index->i_range}};
    }
    return j;
}

Mappings mappings_from_json(const json& j) {
    ju::expect_object(j, "mappings");
    ju::allow_only(j, {"frequency", "amplitude", "modulation_index"}, "mappings");
    Mappings m;
    if (const auto it = j.find("frequency"); it != j.end()) {
        ju::expect_object(*it, "frequency mapping");
        ju::allow_only(*it, {"min", "range"}, "frequency mapping");
        m.frequency = FrequencyMapping{ju::number(*it, "min"), ju::number(*it, "range")};
    }
    m.amplitude = ju::boolean_or(j, "amplitude", false);
    if (const auto it = j.find("modulation_index"); it != j.end()) {
        ju::expect_object(*it, "modulation index mapping");
        ju::allow_only(*it, {"min", "range"}, "modulation index mapping");
        const ModulationIndexMapping defaults;
        m.modulation_index = ModulationIndexMapping{ju::number_or(*it, "min", defaults.i_min),
                                                    ju::number_or(*it, "range", defaults.i_range)};
    }
    return m;
}

json to_json(const TrackConfig& t) {
    json j{{"id", t.id.value},
           {"series", t.series},
           {"source", to_json(t.source)},
           {"mode", to_string(t.mode)},
           {"mappings", to_json(t.mappings)},
           {"envelopes", {{"continuous", to_json(t.continuous_envelope)}, {"discrete", to_json(t.discrete_envelope)}}},
           {"pan", t.pan},
           {"muted", t.muted}};
    if (t.discrete) {
        j["discrete"] = {{"threshold", t.discrete->threshold}, {"increment", t.discrete->increment}};
    }
    return j;
}

TrackConfig track_from_json(const json& j) {
    ju::expect_object(j, "track");
    ju::allow_only(j, {"id", "series", "source", "mode", "mappings", "envelope", "envelopes", "pan", "muted", "discrete"},
                   "track");
    TrackConfig t;
    t.id = ju::track_id(ju::field(j, "id"), "id");
    t.series = ju::string(ju::field(j, "series"), "series");
    if (j.contains("source")) {
        t.source = source_from_json(j["source"]);
    }
    if (j.contains("mode")) {
        t.mode = ju::enum_field(j["mode"], "mode", parse_play_mode);
    }
    if (j.contains("mappings")) {
        t.mappings = mappings_from_json(j["mappings"]);
    }
    if (const auto it = j.find("envelopes"); it != j.end()) {
        ju::expect_object(*it, "envelopes");
        ju::allow_only(*it, {"continuous", "discrete"}, "envelopes");
        if (it->contains("continuous")) t.continuous_envelope = envelope_from_json((*it)["continuous"]);
        if (it->contains("discrete")) t.discrete_envelope = envelope_from_json((*it)["discrete"]);
    }
    // "envelope" overrides the envelope of the track's current mode
    if (j.contains("envelope")) {
        t.envelope() = envelope_from_json(j["envelope"]);
    }
    t.pan = ju::number_or(j, "pan", 0.0);
    t.muted = ju::boolean_or(j, "muted", false);
    if (const auto it = j.find("discrete"); it != j.end()) {
        ju::expect_object(*it, "discrete rule");
        ju::allow_only(*it, {"threshold", "increment"}, "discrete rule");
        t.discrete = DiscreteRule::starting_at(ju::number(*it, "threshold"), ju::number_or(*it, "increment", 0.0));
    }
    return t;
}

json to_json(const Session& s) {
    json tracks = json::array();
    for (const auto& t : s.tracks) {
        tracks.push_back(to_json(t));
    }
    json links = json::array();
    for (const auto& l : s.links) {
        links.push_back({{"modulator", l.modulator.value}, {"carrier", l.carrier.value}});
    }
    json interleave_tracks = json::array();
    for (const auto id : s.transport.interleave_set) {
        interleave_tracks.push_back(id.value);
    }
    return {{"dataset", s.dataset_path},
            {"normalization", to_string(s.normalization)},
            {"sample_rate", s.sample_rate},
            {"block_size", s.block_size},
            {"color_seed", s.color_seed},
            {"transport",
             {{"rate", s.transport.rate},
              {"interleave", {{"enabled", s.transport.interleave_enabled}, {"tracks", interleave_tracks}}}}},
            {"tracks", tracks},
            {"fm_links", links}};
}

std::filesystem::path resolve_path(const std::string& path, const std::filesystem::path& base_dir) {
    const std::filesystem::path p(path);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void load_sources(Session& session, const std::filesystem::path& base_dir) {
    for (auto& track : session.tracks) {
        if (auto* sample = std::get_if<SampleSource>(&track.source); sample && !sample->buffer) {
            sample->buffer = load_sample(resolve_path(sample->file, base_dir));
        }
    }
}

Session session_from_json(const json& j, const std::filesystem::path& base_dir) {
    Session s;
    try {
        ju::expect_object(j, "session config");
        ju::allow_only(j,
                       {"dataset", "normalization", "sample_rate", "block_size", "color_seed", "transport", "tracks",
                        "fm_links"},
                       "session config");
        s.dataset_path = ju::string(ju::field(j, "dataset"), "dataset");
        if (j.contains("normalization")) {
            s.normalization = ju::enum_field(j["normalization"], "normalization", parse_normalization);
        }
        s.sample_rate = ju::number_or(j, "sample_rate", kDefaultSampleRate);
        s.block_size = ju::unsigned_integer(j, "block_size", kDefaultBlockSize, true);
        s.color_seed = static_cast<std::uint32_t>(ju::unsigned_integer(j, "color_seed", 0, true));

        if (const auto it = j.find("transport"); it != j.end()) {
            ju::expect_object(*it, "transport");
            ju::allow_only(*it, {"rate", "interleave"}, "transport");
            s.transport.rate = ju::number_or(*it, "rate", s.transport.rate);
            if (const auto il = it->find("interleave"); il != it->end()) {
                ju::expect_object(*il, "interleave");
                ju::allow_only(*il, {"enabled", "tracks"}, "interleave");
                s.transport.interleave_enabled = ju::boolean_or(*il, "enabled", false);
                if (const auto ids = il->find("tracks"); ids != il->end()) {
                    if (!ids->is_array()) throw SchemaError("interleave tracks must be an array");
                    for (const auto& id : *ids) s.transport.interleave_set.push_back(ju::track_id(id, "tracks"));
                }
            }
        }

        if (const auto it = j.find("tracks"); it != j.end()) {
            if (!it->is_array()) throw SchemaError("tracks must be an array");
            for (const auto& t : *it) s.tracks.push_back(track_from_json(t));
        }
        if (const auto it = j.find("fm_links"); it != j.end()) {
            if (!it->is_array()) throw SchemaError("fm_links must be an array");
            for (const auto& l : *it) {
                ju::expect_object(l, "fm link");
                ju::allow_only(l, {"modulator", "carrier"}, "fm link");
                s.links.push_back({ju::track_id(ju::field(l, "modulator"), "modulator"),
                                   ju::track_id(ju::field(l, "carrier"), "carrier")});
            }
        }
        load_sources(s, base_dir);
    } catch (const SchemaError& e) {
        throw ConfigError(e.what());
    } catch (const SampleLoadError& e) {
        throw ConfigError(e.what());
    }

    s.dataset = std::make_shared<const Dataset>(
        load_dataset(resolve_path(s.dataset_path, base_dir), DataFormat::Csv, s.color_seed));

    try {
        validate(s);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    return s;
}

Session load_session(const std::filesystem::path& config_path) {
    std::ifstream in(config_path);
    if (!in) {
        throw ConfigError("cannot open session config " + config_path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("session config " + config_path.string() + " is not valid JSON: " + e.what());
    }
    return session_from_json(j, config_path.parent_path());
}

}  // namespace sonify
