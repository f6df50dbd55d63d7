#include "sonify/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace sonify {

namespace {

constexpr double kGoldenAngleDegrees = 137.50776405003785;
constexpr double kColorSaturation = 0.65;
constexpr double kColorLightness = 0.55;

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t fnv1a_le(std::uint64_t hash, std::uint64_t value, int width) {
    for (int i = 0; i < width; ++i) {
        const unsigned char byte = static_cast<unsigned char>(value >> (8 * i));
        hash = fnv1a(hash, &byte, 1);
    }
    return hash;
}

Rgb hsl_to_rgb(double hue_degrees, double s, double l) {
    const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
    const double h = hue_degrees / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h) % 6) {
        case 0: r = c; g = x; break;
        case 1: r = x; g = c; break;
        case 2: g = c; b = x; break;
        case 3: g = x; b = c; break;
        case 4: r = x; b = c; break;
        default: r = c; b = x; break;
    }
    const double m = l - c / 2.0;
    auto to_byte = [m](double v) {
        return static_cast<std::uint8_t>(std::lround(std::clamp(v + m, 0.0, 1.0) * 255.0));
    };
    return {to_byte(r), to_byte(g), to_byte(b)};
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

AttributeSeries::AttributeSeries(std::string name, std::vector<double> values, Rgb color)
    : name_(std::move(name)), values_(std::move(values)), color_(color) {
    if (values_.empty()) {
        return;
    }
    const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    min_ = *lo;
    max_ = *hi;
    const double n = static_cast<double>(values_.size());
    mean_ = std::accumulate(values_.begin(), values_.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values_) {
        ss += (v - mean_) * (v - mean_);
    }
    stddev_ = std::sqrt(ss / n);
}

Dataset::Dataset(std::string name, std::vector<AttributeSeries> series)
    : name_(std::move(name)), series_(std::move(series)) {
    if (series_.empty()) {
        throw EmptyDataset("dataset '" + name_ + "' has no attributes");
    }
    length_ = series_.front().size();
    if (length_ == 0) {
        throw EmptyDataset("dataset '" + name_ + "' has no data rows");
    }
    std::unordered_set<std::string> seen;
    for (const auto& s : series_) {
        if (s.size() != length_) {
            throw DatasetError("series '" + s.name() + "' has " + std::to_string(s.size()) +
                               " rows, expected " + std::to_string(length_));
        }
        if (!seen.insert(s.name()).second) {
            throw DatasetError("duplicate series name '" + s.name() + "'");
        }
    }
}

std::optional<std::size_t> Dataset::index_of(std::string_view series_name) const {
    for (std::size_t i = 0; i < series_.size(); ++i) {
        if (series_[i].name() == series_name) {
            return i;
        }
    }
    return std::nullopt;
}

std::string_view to_string(Normalization method) noexcept {
    switch (method) {
        case Normalization::MinMax: return "minmax";
        case Normalization::ZScoreClamped: return "zscore";
    }
    return "minmax";
}

std::optional<Normalization> parse_normalization(std::string_view text) noexcept {
    if (text == "minmax") return Normalization::MinMax;
    if (text == "zscore") return Normalization::ZScoreClamped;
    return std::nullopt;
}

FileNotFound::FileNotFound(const std::filesystem::path& path)
    : DatasetError("dataset file not found: " + path.string()) {}

ParseError::ParseError(std::size_t row, std::size_t col, std::string text, std::string_view reason)
    : DatasetError("parse error at row " + std::to_string(row) + ", column " + std::to_string(col) +
                   ": " + std::string(reason) + " '" + text + "'"),
      row_(row),
      col_(col),
      text_(std::move(text)) {}

Rgb series_color(std::string_view dataset_name, std::size_t index, std::uint32_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = fnv1a(h, dataset_name.data(), dataset_name.size());
    h = fnv1a_le(h, seed, 4);
    const double base = static_cast<double>(h % 3600) / 10.0;
    // golden-angle stepping keeps neighbouring tracks visually distinct
    const double hue = std::fmod(base + static_cast<double>(index) * kGoldenAngleDegrees, 360.0);
    return hsl_to_rgb(hue, kColorSaturation, kColorLightness);
}

Dataset parse_csv(std::string_view text, std::string name, std::uint32_t color_seed) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    std::vector<std::string_view> lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) {
        lines.pop_back();
    }
    if (lines.empty()) {
        throw EmptyDataset("dataset '" + name + "' has no header row");
    }

    std::vector<std::string> header;
    std::unordered_set<std::string> seen;
    for (const auto cell : split(lines.front(), ',')) {
        const auto col = header.size() + 1;
        const std::string label(trim(cell));
        if (label.empty()) {
            throw ParseError(1, col, label, "empty attribute name");
        }
        if (!seen.insert(label).second) {
            throw ParseError(1, col, label, "duplicate attribute name");
        }
        header.push_back(label);
    }

    std::vector<std::vector<double>> columns(header.size());
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t row = li + 1;
        const auto cells = split(lines[li], ',');
        if (cells.size() != header.size()) {
            throw ParseError(row, std::min(cells.size(), header.size()) + 1, std::string(trim(lines[li])),
                             "expected " + std::to_string(header.size()) + " cells in");
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto cell = trim(cells[c]);
            double value = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+') {
                ++first;
            }
            const auto [ptr, ec] = std::from_chars(first, last, value);
            if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
                throw ParseError(row, c + 1, std::string(cell), "not a number:");
            }
            columns[c].push_back(value);
        }
    }
    if (lines.size() == 1) {
        throw EmptyDataset("dataset '" + name + "' has no data rows");
    }

    std::vector<AttributeSeries> series;
    series.reserve(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        series.emplace_back(header[c], std::move(columns[c]), series_color(name, c, color_seed));
    }
    return Dataset(std::move(name), std::move(series));
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format, std::uint32_t color_seed) {
    (void)format;
    std::ifstream in(path, std::ios::binary);
    if (!in || std::filesystem::is_directory(path)) {
        throw FileNotFound(path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), path.stem().string(), color_seed);
}

double normalize_value(const AttributeSeries& series, Normalization method, double value) noexcept {
    switch (method) {
        case Normalization::MinMax: {
            const double range = series.max() - series.min();
            if (!(range > 0.0)) {
                return 0.5;
            }
            return std::clamp((value - series.min()) / range, 0.0, 1.0);
        }
        case Normalization::ZScoreClamped: {
            const double sd = series.stddev();
            if (!(sd > 0.0)) {
                return 0.5;
            }
            // z in [-3, 3] maps affinely onto [0, 1]
            const double z = (value - series.mean()) / sd;
            return std::clamp((z + 3.0) / 6.0, 0.0, 1.0);
        }
    }
    return 0.5;
}

double normalize(const AttributeSeries& series, Normalization method, std::size_t index) {
    if (index >= series.size()) {
        throw std::out_of_range("row " + std::to_string(index) + " outside series '" + series.name() +
                                "' of length " + std::to_string(series.size()));
    }
    return normalize_value(series, method, series[index]);
}

}  // namespace sonify
