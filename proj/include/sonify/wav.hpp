#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace sonify {

class WavFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Interleaved samples normalized to [-1, 1].
struct WavData {
    std::uint32_t sample_rate = 0;
    std::uint16_t channels = 0;
    std::uint16_t bits_per_sample = 0;
    std::vector<float> samples;

    std::size_t frame_count() const noexcept { return channels ? samples.size() / channels : 0; }
};

/// Accepts integer PCM (8/16/24/32 bit) and 32/64-bit float, including the
/// WAVE_FORMAT_EXTENSIBLE wrapper.
WavData decode_wav(std::span<const std::uint8_t> bytes);
WavData read_wav(const std::filesystem::path& path);

/// Canonical 44-byte header followed by little-endian 16-bit PCM.
std::vector<std::uint8_t> encode_wav16(std::span<const std::int16_t> interleaved, std::uint16_t channels,
                                       std::uint32_t sample_rate);
void write_wav16(const std::filesystem::path& path, std::span<const std::int16_t> interleaved,
                 std::uint16_t channels, std::uint32_t sample_rate);

/// Round-to-nearest conversion with hard clipping and no dither.
std::int16_t to_pcm16(double sample) noexcept;

}  // namespace sonify
