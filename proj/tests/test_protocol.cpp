#include <catch_amalgamated.hpp>

#include "sonify/protocol.hpp"

using namespace sonify;
using nlohmann::json;

namespace {

std::vector<ClientFrame> every_client_message() {
    return {
        {"a1", msg::LoadDataset{"data/eeg.csv", Normalization::ZScoreClamped}},
        {std::nullopt, msg::LoadDataset{"x.csv", std::nullopt}},
        {"n", msg::SetNormalization{Normalization::MinMax}},
        {"p", msg::Play{}},
        {std::nullopt, msg::Stop{}},
        {std::nullopt, msg::Reset{}},
        {"r", msg::SetRate{0.002}},
        {"m", msg::Mute{TrackId{3}, false}},
        {"s", msg::SetSource{TrackId{1}, OscillatorSource{Waveform::Triangle, 300.0, 0.25}}},
        {"s2", msg::SetSource{TrackId{1}, SampleSource{"click.wav", 2.0, 0.8, nullptr}}},
        {"f", msg::SetMapping{TrackId{0}, msg::MappingKind::Frequency, true, 261.6, 600.0}},
        {"i", msg::SetMapping{TrackId{0}, msg::MappingKind::ModulationIndex, false, 0.0, 5.0}},
        {"e", msg::SetEnvelope{TrackId{2}, Envelope{0.01, 0.2, 0.0, 0.05}}},
        {"d", msg::SetMode{TrackId{2}, PlayMode::Discrete}},
        {"t", msg::SetDiscreteRule{TrackId{2}, 1.0, 2.0}},
        {"l", msg::AddFmLink{{TrackId{1}, TrackId{0}}}},
        {"u", msg::RemoveFmLink{{TrackId{1}, TrackId{0}}}},
        {"x", msg::MoveSpeaker{TrackId{0}, -0.5}},
        {"il", msg::SetInterleave{true, {TrackId{0}, TrackId{2}}}},
    };
}

std::vector<ServerMessage> every_server_message() {
    return {
        msg::StateSnapshot{1, true, json{{"sample_rate", 44100}}, "a1"},
        msg::StateSnapshot{2, false, json::array({{{"op", "replace"}, {"path", "/playing"}, {"value", true}}}),
                           std::nullopt},
        msg::CursorUpdate{12.5, 12, true, 4096},
        msg::TriggerEvent{1.5, TrackId{2}, 30, 3.0},
        msg::AudioChunk{1024, {1, -1, 32767, -32768}},
        msg::Error{"rejected", "no such track", "z"},
        msg::Error{"malformed", "bad json", std::nullopt},
        msg::LevelMeters{0.3, {{TrackId{0}, 0.25, 440.0}, {TrackId{1}, 0.0, 0.0}}},
        msg::Resync{8192},
    };
}

}  // namespace

TEST_CASE("client messages round trip through text") {
    for (const auto& frame : every_client_message()) {
        const auto text = serialize(frame);
        INFO(text);
        CHECK(parse_client_message(text) == frame);
    }
}

TEST_CASE("server messages round trip through text") {
    for (const auto& m : every_server_message()) {
        const auto text = serialize(m);
        INFO(text);
        CHECK(parse_server_message(text) == m);
    }
}

TEST_CASE("type tags") {
    CHECK(message_type(ClientMessage{msg::AddFmLink{}}) == "add_fm_link");
    CHECK(message_type(ServerMessage{msg::LevelMeters{}}) == "level_meters");
    CHECK(json::parse(serialize(ClientFrame{"q", msg::Play{}})) == json{{"type", "play"}, {"id", "q"}});
}

TEST_CASE("defaults for optional fields") {
    auto f = parse_client_message(R"({"type":"mute","track":4})");
    CHECK(std::get<msg::Mute>(f.message) == msg::Mute{TrackId{4}, true});
    f = parse_client_message(R"({"type":"set_mapping","track":1,"target":"frequency"})");
    CHECK(std::get<msg::SetMapping>(f.message) ==
          msg::SetMapping{TrackId{1}, msg::MappingKind::Frequency, true, 261.6, 600.0});
    f = parse_client_message(R"({"type":"set_mapping","track":1,"target":"modulation_index"})");
    CHECK(std::get<msg::SetMapping>(f.message).range == 5.0);
    f = parse_client_message(R"({"type":"set_discrete_rule","track":1,"threshold":2})");
    CHECK(std::get<msg::SetDiscreteRule>(f.message).increment == 0.0);
    f = parse_client_message(R"({"type":"set_interleave","enabled":false})");
    CHECK(std::get<msg::SetInterleave>(f.message).tracks.empty());
}

TEST_CASE("malformed client frames are rejected") {
    const char* bad[] = {
        "not json",
        "[]",
        R"({"id":"x"})",
        R"({"type":"dance"})",
        R"({"type":"play","extra":1})",
        R"({"type":"mute","track":"zero"})",
        R"({"type":"mute","track":-1})",
        R"({"type":"mute","track":1.5})",
        R"({"type":"set_rate"})",
        R"({"type":"set_rate","rate":"fast"})",
        R"({"type":"set_mode","track":0,"mode":"loud"})",
        R"({"type":"set_mapping","track":0,"target":"pitch"})",
        R"({"type":"set_interleave","enabled":true,"tracks":3})",
        R"({"type":"set_source","track":0,"source":{"type":"noise"}})",
        R"({"type":"set_envelope","track":0,"envelope":{"attack":0.1}})",
        R"({"type":"play","id":7})",
    };
    for (const char* text : bad) {
        INFO(text);
        CHECK_THROWS_AS(parse_client_message(text), ProtocolError);
    }
}

TEST_CASE("malformed server frames are rejected") {
    CHECK_THROWS_AS(parse_server_message(R"({"type":"state_snapshot","seq":1,"full":true,"state":[]})"),
                    ProtocolError);
    CHECK_THROWS_AS(parse_server_message(R"({"type":"state_snapshot","seq":1,"full":false,"patch":{}})"),
                    ProtocolError);
    CHECK_THROWS_AS(parse_server_message(R"({"type":"audio_chunk","start_frame":0,"channels":1,"pcm":""})"),
                    ProtocolError);
    CHECK_THROWS_AS(parse_server_message(R"({"type":"resync"})"), ProtocolError);
}

TEST_CASE("binary audio frame layout") {
    const msg::AudioChunk chunk{0x0102030405060708ull, {1, -2, 256, -32768}};
    const auto bytes = encode_audio_frame(chunk);
    REQUIRE(bytes.size() == 8 + 8);
    const std::vector<std::uint8_t> header{0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01};
    CHECK(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 8) == header);
    CHECK(bytes[8] == 0x01);
    CHECK(bytes[9] == 0x00);
    CHECK(bytes[10] == 0xFE);
    CHECK(bytes[11] == 0xFF);
    CHECK(bytes[12] == 0x00);
    CHECK(bytes[13] == 0x01);
    CHECK(bytes[14] == 0x00);
    CHECK(bytes[15] == 0x80);
    CHECK(decode_audio_frame(bytes) == chunk);
    CHECK(chunk.frames() == 2);
}

TEST_CASE("binary frames with partial samples are rejected") {
    CHECK_THROWS_AS(decode_audio_frame(std::vector<std::uint8_t>(7)), ProtocolError);
    CHECK_THROWS_AS(decode_audio_frame(std::vector<std::uint8_t>(8 + 3)), ProtocolError);
    CHECK_THROWS_AS(decode_audio_frame(std::vector<std::uint8_t>(8 + 2)), ProtocolError);  // half a stereo frame
    CHECK(decode_audio_frame(std::vector<std::uint8_t>(8)).pcm.empty());
}
