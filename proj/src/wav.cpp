#include "sonify/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace sonify {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32(std::size_t at) const {
        need(at, 4);
        return static_cast<std::uint32_t>(bytes_[at]) | (static_cast<std::uint32_t>(bytes_[at + 1]) << 8) |
               (static_cast<std::uint32_t>(bytes_[at + 2]) << 16) |
               (static_cast<std::uint32_t>(bytes_[at + 3]) << 24);
    }
    std::uint16_t u16(std::size_t at) const {
        need(at, 2);
        return static_cast<std::uint16_t>(bytes_[at] | (bytes_[at + 1] << 8));
    }
    bool tag(std::size_t at, const char* id) const {
        need(at, 4);
        return std::memcmp(bytes_.data() + at, id, 4) == 0;
    }
    void need(std::size_t at, std::size_t n) const {
        if (at + n > bytes_.size()) {
            throw WavFormatError("truncated WAV data");
        }
    }
    std::size_t size() const noexcept { return bytes_.size(); }
    const std::uint8_t* data() const noexcept { return bytes_.data(); }

private:
    std::span<const std::uint8_t> bytes_;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* id) {
    out.insert(out.end(), id, id + 4);
}

float decode_sample(const std::uint8_t* p, std::uint16_t format, std::uint16_t bits) {
    if (format == kFormatFloat) {
        if (bits == 32) {
            std::uint32_t raw = p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
            float f;
            std::memcpy(&f, &raw, 4);
            return f;
        }
        std::uint64_t raw = 0;
        for (int i = 0; i < 8; ++i) raw |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        double d;
        std::memcpy(&d, &raw, 8);
        return static_cast<float>(d);
    }
    switch (bits) {
        case 8: return (static_cast<int>(p[0]) - 128) / 128.0f;
        case 16: return static_cast<std::int16_t>(p[0] | (p[1] << 8)) / 32768.0f;
        case 24: {
            std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
            if (v & 0x800000) v -= 0x1000000;
            return static_cast<float>(v / 8388608.0);
        }
        default: {
            const auto v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16) |
                                                     (static_cast<std::uint32_t>(p[3]) << 24));
            return static_cast<float>(v / 2147483648.0);
        }
    }
}

}  // namespace

WavData decode_wav(std::span<const std::uint8_t> bytes) {
    const Reader r(bytes);
    if (r.size() < 12 || !r.tag(0, "RIFF") || !r.tag(8, "WAVE")) {
        throw WavFormatError("not a RIFF/WAVE file");
    }

    WavData wav;
    std::uint16_t format = 0;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= r.size()) {
        const std::uint32_t chunk_size = r.u32(pos + 4);
        const std::size_t body = pos + 8;
        if (r.tag(pos, "fmt ")) {
            if (chunk_size < 16) {
                throw WavFormatError("fmt chunk too short");
            }
            format = r.u16(body);
            wav.channels = r.u16(body + 2);
            wav.sample_rate = r.u32(body + 4);
            wav.bits_per_sample = r.u16(body + 14);
            if (format == kFormatExtensible) {
                if (chunk_size < 40) {
                    throw WavFormatError("extensible fmt chunk too short");
                }
                format = r.u16(body + 24);
            }
            have_fmt = true;
        } else if (r.tag(pos, "data")) {
            if (!have_fmt) {
                throw WavFormatError("data chunk before fmt chunk");
            }
            const bool pcm_ok = format == kFormatPcm &&
                                (wav.bits_per_sample == 8 || wav.bits_per_sample == 16 ||
                                 wav.bits_per_sample == 24 || wav.bits_per_sample == 32);
            const bool float_ok = format == kFormatFloat && (wav.bits_per_sample == 32 || wav.bits_per_sample == 64);
            if (!pcm_ok && !float_ok) {
                throw WavFormatError("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                                     std::to_string(wav.bits_per_sample) + " bits)");
            }
            if (wav.channels == 0 || wav.sample_rate == 0) {
                throw WavFormatError("WAV header declares zero channels or sample rate");
            }
            const std::size_t width = wav.bits_per_sample / 8;
            const std::size_t available = std::min<std::size_t>(chunk_size, r.size() - body);
            const std::size_t count = available / width / wav.channels * wav.channels;
            wav.samples.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                wav.samples[i] = decode_sample(r.data() + body + i * width, format, wav.bits_per_sample);
            }
            return wav;
        }
        pos = body + chunk_size + (chunk_size & 1u);
    }
    throw WavFormatError("WAV file has no data chunk");
}

WavData read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_wav(bytes);
}

std::vector<std::uint8_t> encode_wav16(std::span<const std::int16_t> interleaved, std::uint16_t channels,
                                       std::uint32_t sample_rate) {
    const auto data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
    std::vector<std::uint8_t> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, channels);
    put_u32(out, sample_rate);
    put_u32(out, sample_rate * channels * 2);
    put_u16(out, static_cast<std::uint16_t>(channels * 2));
    put_u16(out, 16);
    put_tag(out, "data");
    put_u32(out, data_bytes);
    for (const std::int16_t s : interleaved) {
        put_u16(out, static_cast<std::uint16_t>(s));
    }
    return out;
}

void write_wav16(const std::filesystem::path& path, std::span<const std::int16_t> interleaved,
                 std::uint16_t channels, std::uint32_t sample_rate) {
    const auto bytes = encode_wav16(interleaved, channels, sample_rate);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

std::int16_t to_pcm16(double sample) noexcept {
    if (!std::isfinite(sample)) {
        return 0;
    }
    const double clipped = std::clamp(sample, -1.0, 1.0);
    return static_cast<std::int16_t>(std::lround(clipped * 32767.0));
}

}  // namespace sonify
