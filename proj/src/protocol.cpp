#include "sonify/protocol.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include "json_util.hpp"
#include "sonify/session_io.hpp"

namespace sonify {

using nlohmann::json;
namespace ju = json_util;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string to_base64(const std::vector<std::int16_t>& pcm) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(pcm.size() * 2);
    for (const auto s : pcm) {
        bytes.push_back(static_cast<std::uint8_t>(static_cast<std::uint16_t>(s) & 0xFF));
        bytes.push_back(static_cast<std::uint8_t>(static_cast<std::uint16_t>(s) >> 8));
    }
    std::string out(boost::beast::detail::base64::encoded_size(bytes.size()), '\0');
    out.resize(boost::beast::detail::base64::encode(out.data(), bytes.data(), bytes.size()));
    return out;
}

std::vector<std::int16_t> from_base64(const std::string& text) {
    // the decoder stops at padding, so count only the data characters
    std::size_t data_chars = text.size();
    while (data_chars > 0 && text.size() - data_chars < 2 && text[data_chars - 1] == '=') --data_chars;
    std::vector<std::uint8_t> bytes(boost::beast::detail::base64::decoded_size(text.size()));
    const auto [written, read] = boost::beast::detail::base64::decode(bytes.data(), text.data(), data_chars);
    if (text.size() % 4 != 0 || read != data_chars || written % 4 != 0) {
        throw SchemaError("pcm must be base64 of whole stereo int16 frames");
    }
    std::vector<std::int16_t> pcm(written / 2);
    for (std::size_t i = 0; i < pcm.size(); ++i) {
        pcm[i] = static_cast<std::int16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
    }
    return pcm;
}

json track_ids(const std::vector<TrackId>& ids) {
    json out = json::array();
    for (const auto id : ids) out.push_back(id.value);
    return out;
}

void put_ack(json& j, const std::optional<std::string>& ack) {
    if (ack) j["ack"] = *ack;
}

std::optional<std::string> get_ack(const json& j) {
    if (const auto it = j.find("ack"); it != j.end()) return ju::string(*it, "ack");
    return std::nullopt;
}

FmLink link_from(const json& j) {
    return {ju::track_id(ju::field(j, "modulator"), "modulator"), ju::track_id(ju::field(j, "carrier"), "carrier")};
}

ClientMessage client_body(const std::string& type, const json& j) {
    auto only = [&](std::initializer_list<std::string_view> keys) { ju::allow_only(j, keys, type + " message"); };
    auto track = [&] { return ju::track_id(ju::field(j, "track"), "track"); };

    if (type == "load_dataset") {
        only({"type", "id", "path", "normalization"});
        msg::LoadDataset m{ju::string(ju::field(j, "path"), "path"), std::nullopt};
        if (j.contains("normalization")) {
            m.normalization = ju::enum_field(j["normalization"], "normalization", parse_normalization);
        }
        return m;
    }
    if (type == "set_normalization") {
        only({"type", "id", "method"});
        return msg::SetNormalization{ju::enum_field(ju::field(j, "method"), "method", parse_normalization)};
    }
    if (type == "play") {
        only({"type", "id"});
        return msg::Play{};
    }
    if (type == "stop") {
        only({"type", "id"});
        return msg::Stop{};
    }
    if (type == "reset") {
        only({"type", "id"});
        return msg::Reset{};
    }
    if (type == "set_rate") {
        only({"type", "id", "rate"});
        return msg::SetRate{ju::number(j, "rate")};
    }
    if (type == "mute") {
        only({"type", "id", "track", "muted"});
        return msg::Mute{track(), ju::boolean_or(j, "muted", true)};
    }
    if (type == "set_source") {
        only({"type", "id", "track", "source"});
        return msg::SetSource{track(), source_from_json(ju::field(j, "source"))};
    }
    if (type == "set_mapping") {
        only({"type", "id", "track", "target", "enabled", "min", "range"});
        msg::SetMapping m;
        m.track = track();
        m.target = ju::enum_field(ju::field(j, "target"), "target", msg::parse_mapping_kind);
        m.enabled = ju::boolean_or(j, "enabled", true);
        if (m.target == msg::MappingKind::Frequency) {
            const FrequencyMapping d;
            m.min = ju::number_or(j, "min", d.f_min);
            m.range = ju::number_or(j, "range", d.f_range);
        } else if (m.target == msg::MappingKind::ModulationIndex) {
            const ModulationIndexMapping d;
            m.min = ju::number_or(j, "min", d.i_min);
            m.range = ju::number_or(j, "range", d.i_range);
        } else {
            m.min = ju::number_or(j, "min", 0.0);
            m.range = ju::number_or(j, "range", 0.0);
        }
        return m;
    }
    if (type == "set_envelope") {
        only({"type", "id", "track", "envelope"});
        return msg::SetEnvelope{track(), envelope_from_json(ju::field(j, "envelope"))};
    }
    if (type == "set_mode") {
        only({"type", "id", "track", "mode"});
        return msg::SetMode{track(), ju::enum_field(ju::field(j, "mode"), "mode", parse_play_mode)};
    }
    if (type == "set_discrete_rule") {
        only({"type", "id", "track", "threshold", "increment"});
        return msg::SetDiscreteRule{track(), ju::number(j, "threshold"), ju::number_or(j, "increment", 0.0)};
    }
    if (type == "add_fm_link") {
        only({"type", "id", "modulator", "carrier"});
        return msg::AddFmLink{link_from(j)};
    }
    if (type == "remove_fm_link") {
        only({"type", "id", "modulator", "carrier"});
        return msg::RemoveFmLink{link_from(j)};
    }
    if (type == "move_speaker") {
        only({"type", "id", "track", "x"});
        return msg::MoveSpeaker{track(), ju::number(j, "x")};
    }
    if (type == "set_interleave") {
        only({"type", "id", "enabled", "tracks"});
        msg::SetInterleave m{ju::boolean(ju::field(j, "enabled"), "enabled"), {}};
        if (const auto it = j.find("tracks"); it != j.end()) {
            if (!it->is_array()) throw SchemaError("field 'tracks' must be an array");
            for (const auto& id : *it) m.tracks.push_back(ju::track_id(id, "tracks"));
        }
        return m;
    }
    throw SchemaError("unknown message type '" + type + "'");
}

ServerMessage server_body(const std::string& type, const json& j) {
    auto only = [&](std::initializer_list<std::string_view> keys) { ju::allow_only(j, keys, type + " message"); };

    if (type == "state_snapshot") {
        only({"type", "seq", "full", "state", "patch", "ack"});
        msg::StateSnapshot m;
        m.seq = ju::unsigned_integer(ju::field(j, "seq"), "seq");
        m.full = ju::boolean(ju::field(j, "full"), "full");
        m.body = m.full ? ju::field(j, "state") : ju::field(j, "patch");
        if (m.full ? !m.body.is_object() : !m.body.is_array()) {
            throw SchemaError(m.full ? "state must be an object" : "patch must be an array");
        }
        m.ack = get_ack(j);
        return m;
    }
    if (type == "cursor_update") {
        only({"type", "cursor", "row", "playing", "frame"});
        return msg::CursorUpdate{ju::number(j, "cursor"), ju::unsigned_integer(ju::field(j, "row"), "row"),
                                 ju::boolean(ju::field(j, "playing"), "playing"),
                                 ju::unsigned_integer(ju::field(j, "frame"), "frame")};
    }
    if (type == "trigger_event") {
        only({"type", "time", "track", "row", "value"});
        return msg::TriggerEvent{ju::number(j, "time"), ju::track_id(ju::field(j, "track"), "track"),
                                 ju::unsigned_integer(ju::field(j, "row"), "row"), ju::number(j, "value")};
    }
    if (type == "audio_chunk") {
        only({"type", "start_frame", "channels", "pcm"});
        if (ju::unsigned_integer(ju::field(j, "channels"), "channels") != 2) {
            throw SchemaError("audio chunks carry 2 channels");
        }
        return msg::AudioChunk{ju::unsigned_integer(ju::field(j, "start_frame"), "start_frame"),
                               from_base64(ju::string(ju::field(j, "pcm"), "pcm"))};
    }
    if (type == "error") {
        only({"type", "code", "message", "ack"});
        return msg::Error{ju::string(ju::field(j, "code"), "code"), ju::string(ju::field(j, "message"), "message"),
                          get_ack(j)};
    }
    if (type == "level_meters") {
        only({"type", "master", "tracks"});
        msg::LevelMeters m{ju::number(j, "master"), {}};
        const auto& tracks = ju::field(j, "tracks");
        if (!tracks.is_array()) throw SchemaError("field 'tracks' must be an array");
        for (const auto& t : tracks) {
            ju::expect_object(t, "track level");
            ju::allow_only(t, {"track", "rms", "frequency"}, "track level");
            m.tracks.push_back({ju::track_id(ju::field(t, "track"), "track"), ju::number(t, "rms"),
                                ju::number(t, "frequency")});
        }
        return m;
    }
    if (type == "resync") {
        only({"type", "next_frame"});
        return msg::Resync{ju::unsigned_integer(ju::field(j, "next_frame"), "next_frame")};
    }
    throw SchemaError("unknown message type '" + type + "'");
}

json parse_text(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

namespace msg {

std::string_view to_string(MappingKind kind) noexcept {
    switch (kind) {
        case MappingKind::Frequency: return "frequency";
        case MappingKind::Amplitude: return "amplitude";
        case MappingKind::ModulationIndex: return "modulation_index";
    }
    return "frequency";
}

std::optional<MappingKind> parse_mapping_kind(std::string_view text) noexcept {
    if (text == "frequency") return MappingKind::Frequency;
    if (text == "amplitude") return MappingKind::Amplitude;
    if (text == "modulation_index") return MappingKind::ModulationIndex;
    return std::nullopt;
}

}  // namespace msg

std::string_view message_type(const ClientMessage& m) noexcept {
    return std::visit(overloaded{
                          [](const msg::LoadDataset&) { return "load_dataset"; },
                          [](const msg::SetNormalization&) { return "set_normalization"; },
                          [](const msg::Play&) { return "play"; },
                          [](const msg::Stop&) { return "stop"; },
                          [](const msg::Reset&) { return "reset"; },
                          [](const msg::SetRate&) { return "set_rate"; },
                          [](const msg::Mute&) { return "mute"; },
                          [](const msg::SetSource&) { return "set_source"; },
                          [](const msg::SetMapping&) { return "set_mapping"; },
                          [](const msg::SetEnvelope&) { return "set_envelope"; },
                          [](const msg::SetMode&) { return "set_mode"; },
                          [](const msg::SetDiscreteRule&) { return "set_discrete_rule"; },
                          [](const msg::AddFmLink&) { return "add_fm_link"; },
                          [](const msg::RemoveFmLink&) { return "remove_fm_link"; },
                          [](const msg::MoveSpeaker&) { return "move_speaker"; },
                          [](const msg::SetInterleave&) { return "set_interleave"; },
                      },
                      m);
}

std::string_view message_type(const ServerMessage& m) noexcept {
    return std::visit(overloaded{
                          [](const msg::StateSnapshot&) { return "state_snapshot"; },
                          [](const msg::CursorUpdate&) { return "cursor_update"; },
                          [](const msg::TriggerEvent&) { return "trigger_event"; },
                          [](const msg::AudioChunk&) { return "audio_chunk"; },
                          [](const msg::Error&) { return "error"; },
                          [](const msg::LevelMeters&) { return "level_meters"; },
                          [](const msg::Resync&) { return "resync"; },
                      },
                      m);
}

json to_json(const ClientFrame& frame) {
    json j = std::visit(
        overloaded{
            [](const msg::LoadDataset& m) {
                json o{{"path", m.path}};
                if (m.normalization) o["normalization"] = to_string(*m.normalization);
                return o;
            },
            [](const msg::SetNormalization& m) { return json{{"method", to_string(m.method)}}; },
            [](const msg::Play&) { return json::object(); },
            [](const msg::Stop&) { return json::object(); },
            [](const msg::Reset&) { return json::object(); },
            [](const msg::SetRate& m) { return json{{"rate", m.rate}}; },
            [](const msg::Mute& m) { return json{{"track", m.track.value}, {"muted", m.muted}}; },
            [](const msg::SetSource& m) { return json{{"track", m.track.value}, {"source", to_json(m.source)}}; },
            [](const msg::SetMapping& m) {
                return json{{"track", m.track.value}, {"target", msg::to_string(m.target)}, {"enabled", m.enabled},
                            {"min", m.min},           {"range", m.range}};
            },
            [](const msg::SetEnvelope& m) {
                return json{{"track", m.track.value}, {"envelope", to_json(m.envelope)}};
            },
            [](const msg::SetMode& m) { return json{{"track", m.track.value}, {"mode", to_string(m.mode)}}; },
            [](const msg::SetDiscreteRule& m) {
                return json{{"track", m.track.value}, {"threshold", m.threshold}, {"increment", m.increment}};
            },
            [](const msg::AddFmLink& m) {
                return json{{"modulator", m.link.modulator.value}, {"carrier", m.link.carrier.value}};
            },
            [](const msg::RemoveFmLink& m) {
                return json{{"modulator", m.link.modulator.value}, {"carrier", m.link.carrier.value}};
            },
            [](const msg::MoveSpeaker& m) { return json{{"track", m.track.value}, {"x", m.x}}; },
            [](const msg::SetInterleave& m) { return json{{"enabled", m.enabled}, {"tracks", track_ids(m.tracks)}}; },
        },
        frame.message);
    j["type"] = message_type(frame.message);
    if (frame.id) j["id"] = *frame.id;
    return j;
}

json to_json(const ServerMessage& message) {
    json j = std::visit(
        overloaded{
            [](const msg::StateSnapshot& m) {
                json o{{"seq", m.seq}, {"full", m.full}};
                o[m.full ? "state" : "patch"] = m.body;
                put_ack(o, m.ack);
                return o;
            },
            [](const msg::CursorUpdate& m) {
                return json{{"cursor", m.cursor}, {"row", m.row}, {"playing", m.playing}, {"frame", m.frame}};
            },
            [](const msg::TriggerEvent& m) {
                return json{{"time", m.time}, {"track", m.track.value}, {"row", m.row}, {"value", m.value}};
            },
            [](const msg::AudioChunk& m) {
                return json{{"start_frame", m.start_frame}, {"channels", 2}, {"pcm", to_base64(m.pcm)}};
            },
            [](const msg::Error& m) {
                json o{{"code", m.code}, {"message", m.message}};
                put_ack(o, m.ack);
                return o;
            },
            [](const msg::LevelMeters& m) {
                json tracks = json::array();
                for (const auto& t : m.tracks) {
                    tracks.push_back({{"track", t.track.value}, {"rms", t.rms}, {"frequency", t.frequency}});
                }
                return json{{"master", m.master}, {"tracks", tracks}};
            },
            [](const msg::Resync& m) { return json{{"next_frame", m.next_frame}}; },
        },
        message);
    j["type"] = message_type(message);
    return j;
}

ClientFrame client_message_from_json(const json& j) {
    try {
        ju::expect_object(j, "message");
        ClientFrame frame{std::nullopt, msg::Play{}};
        const auto type = ju::string(ju::field(j, "type"), "type");
        if (const auto it = j.find("id"); it != j.end()) {
            frame.id = ju::string(*it, "id");
        }
        frame.message = client_body(type, j);
        return frame;
    } catch (const SchemaError& e) {
        throw ProtocolError(e.what());
    }
}

ClientFrame parse_client_message(std::string_view text) {
    return client_message_from_json(parse_text(text));
}

ServerMessage server_message_from_json(const json& j) {
    try {
        ju::expect_object(j, "message");
        return server_body(ju::string(ju::field(j, "type"), "type"), j);
    } catch (const SchemaError& e) {
        throw ProtocolError(e.what());
    }
}

ServerMessage parse_server_message(std::string_view text) {
    return server_message_from_json(parse_text(text));
}

std::string serialize(const ClientFrame& frame) {
    return to_json(frame).dump();
}

std::string serialize(const ServerMessage& message) {
    return to_json(message).dump();
}

std::vector<std::uint8_t> encode_audio_frame(const msg::AudioChunk& chunk) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + chunk.pcm.size() * 2);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(chunk.start_frame >> (8 * i)));
    }
    for (const auto s : chunk.pcm) {
        const auto u = static_cast<std::uint16_t>(s);
        out.push_back(static_cast<std::uint8_t>(u & 0xFF));
        out.push_back(static_cast<std::uint8_t>(u >> 8));
    }
    return out;
}

msg::AudioChunk decode_audio_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || (bytes.size() - 8) % 4 != 0) {
        throw ProtocolError("audio frame must be an 8-byte header plus whole stereo int16 frames");
    }
    msg::AudioChunk chunk;
    for (int i = 0; i < 8; ++i) {
        chunk.start_frame |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    chunk.pcm.resize((bytes.size() - 8) / 2);
    for (std::size_t i = 0; i < chunk.pcm.size(); ++i) {
        chunk.pcm[i] = static_cast<std::int16_t>(bytes[8 + 2 * i] | (bytes[9 + 2 * i] << 8));
    }
    return chunk;
}

}  // namespace sonify
