#pragma once

// Control protocol between the engine and its UI clients.
//
// Control frames are JSON text objects with a "type" tag. Client requests may
// carry an "id" string that the server echoes in the acknowledging
// state_snapshot or error. Audio travels in binary frames:
//   bytes 0..7   start frame index, uint64 little-endian
//   bytes 8..    interleaved stereo int16 little-endian PCM

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sonify/session.hpp"

namespace sonify {

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace msg {

// client -> server

struct LoadDataset {
    std::string path;
    std::optional<Normalization> normalization;
    friend bool operator==(const LoadDataset&, const LoadDataset&) = default;
};
struct SetNormalization {
    Normalization method = Normalization::MinMax;
    friend bool operator==(const SetNormalization&, const SetNormalization&) = default;
};
struct Play {
    friend bool operator==(const Play&, const Play&) = default;
};
struct Stop {
    friend bool operator==(const Stop&, const Stop&) = default;
};
struct Reset {
    friend bool operator==(const Reset&, const Reset&) = default;
};
struct SetRate {
    double rate = 0.2;
    friend bool operator==(const SetRate&, const SetRate&) = default;
};
struct Mute {
    TrackId track;
    bool muted = true;
    friend bool operator==(const Mute&, const Mute&) = default;
};
struct SetSource {
    TrackId track;
    SoundSource source;
    friend bool operator==(const SetSource&, const SetSource&) = default;
};

enum class MappingKind { Frequency, Amplitude, ModulationIndex };
std::string_view to_string(MappingKind kind) noexcept;
std::optional<MappingKind> parse_mapping_kind(std::string_view text) noexcept;

/// For Amplitude, min and range are ignored.
struct SetMapping {
    TrackId track;
    MappingKind target = MappingKind::Frequency;
    bool enabled = true;
    double min = 0.0;
    double range = 0.0;
    friend bool operator==(const SetMapping&, const SetMapping&) = default;
};
struct SetEnvelope {
    TrackId track;
    Envelope envelope;
    friend bool operator==(const SetEnvelope&, const SetEnvelope&) = default;
};
struct SetMode {
    TrackId track;
    PlayMode mode = PlayMode::Continuous;
    friend bool operator==(const SetMode&, const SetMode&) = default;
};
struct SetDiscreteRule {
    TrackId track;
    double threshold = 0.0;
    double increment = 0.0;
    friend bool operator==(const SetDiscreteRule&, const SetDiscreteRule&) = default;
};
struct AddFmLink {
    FmLink link;
    friend bool operator==(const AddFmLink&, const AddFmLink&) = default;
};
struct RemoveFmLink {
    FmLink link;
    friend bool operator==(const RemoveFmLink&, const RemoveFmLink&) = default;
};
struct MoveSpeaker {
    TrackId track;
    double x = 0.0;
    friend bool operator==(const MoveSpeaker&, const MoveSpeaker&) = default;
};
struct SetInterleave {
    bool enabled = false;
    std::vector<TrackId> tracks;
    friend bool operator==(const SetInterleave&, const SetInterleave&) = default;
};

// server -> client

/// Full state on connect, RFC 6902 JSON Patch against the previous state
/// afterwards.
struct StateSnapshot {
    std::uint64_t seq = 0;
    bool full = true;
    nlohmann::json body;
    std::optional<std::string> ack;
    friend bool operator==(const StateSnapshot&, const StateSnapshot&) = default;
};
struct CursorUpdate {
    double cursor = 0.0;
    std::uint64_t row = 0;
    bool playing = false;
    std::uint64_t frame = 0;
    friend bool operator==(const CursorUpdate&, const CursorUpdate&) = default;
};
struct TriggerEvent {
    double time = 0.0;
    TrackId track;
    std::uint64_t row = 0;
    double value = 0.0;
    friend bool operator==(const TriggerEvent&, const TriggerEvent&) = default;
};
struct AudioChunk {
    std::uint64_t start_frame = 0;
    std::vector<std::int16_t> pcm;  ///< interleaved stereo
    std::size_t frames() const noexcept { return pcm.size() / 2; }
    friend bool operator==(const AudioChunk&, const AudioChunk&) = default;
};
struct Error {
    std::string code;  ///< "malformed" or "rejected"
    std::string message;
    std::optional<std::string> ack;
    friend bool operator==(const Error&, const Error&) = default;
};
struct TrackLevel {
    TrackId track;
    double rms = 0.0;
    double frequency = 0.0;
    friend bool operator==(const TrackLevel&, const TrackLevel&) = default;
};
struct LevelMeters {
    double master = 0.0;
    std::vector<TrackLevel> tracks;
    friend bool operator==(const LevelMeters&, const LevelMeters&) = default;
};
/// Sent to a lagging client after its queued audio was dropped.
struct Resync {
    std::uint64_t next_frame = 0;
    friend bool operator==(const Resync&, const Resync&) = default;
};

}  // namespace msg

using ClientMessage = std::variant<msg::LoadDataset, msg::SetNormalization, msg::Play, msg::Stop, msg::Reset,
                                   msg::SetRate, msg::Mute, msg::SetSource, msg::SetMapping, msg::SetEnvelope,
                                   msg::SetMode, msg::SetDiscreteRule, msg::AddFmLink, msg::RemoveFmLink,
                                   msg::MoveSpeaker, msg::SetInterleave>;

using ServerMessage = std::variant<msg::StateSnapshot, msg::CursorUpdate, msg::TriggerEvent, msg::AudioChunk,
                                   msg::Error, msg::LevelMeters, msg::Resync>;

struct ClientFrame {
    std::optional<std::string> id;
    ClientMessage message;
    friend bool operator==(const ClientFrame&, const ClientFrame&) = default;
};

std::string_view message_type(const ClientMessage& m) noexcept;
std::string_view message_type(const ServerMessage& m) noexcept;

nlohmann::json to_json(const ClientFrame& frame);
nlohmann::json to_json(const ServerMessage& message);

/// Throw ProtocolError on malformed JSON, unknown types, missing or unknown
/// fields, and wrongly typed values.
ClientFrame parse_client_message(std::string_view text);
ClientFrame client_message_from_json(const nlohmann::json& j);
ServerMessage parse_server_message(std::string_view text);
ServerMessage server_message_from_json(const nlohmann::json& j);

std::string serialize(const ClientFrame& frame);
std::string serialize(const ServerMessage& message);

std::vector<std::uint8_t> encode_audio_frame(const msg::AudioChunk& chunk);
msg::AudioChunk decode_audio_frame(std::span<const std::uint8_t> bytes);

}  // namespace sonify
