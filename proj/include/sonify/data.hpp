#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sonify {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// One column of a loaded table. Summary statistics are computed once at
/// construction; the values never change afterwards.
class AttributeSeries {
public:
    AttributeSeries(std::string name, std::vector<double> values, Rgb color);

    const std::string& name() const noexcept { return name_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }
    double mean() const noexcept { return mean_; }
    /// Population standard deviation.
    double stddev() const noexcept { return stddev_; }
    Rgb color() const noexcept { return color_; }

    friend bool operator==(const AttributeSeries&, const AttributeSeries&) = default;

private:
    std::string name_;
    std::vector<double> values_;
    double min_ = 0.0;
    double max_ = 0.0;
    double mean_ = 0.0;
    double stddev_ = 0.0;
    Rgb color_;
};

class Dataset {
public:
    /// Throws DatasetError when series lengths differ, are empty, or names repeat.
    Dataset(std::string name, std::vector<AttributeSeries> series);

    const std::string& name() const noexcept { return name_; }
    const std::vector<AttributeSeries>& series() const noexcept { return series_; }
    std::size_t length() const noexcept { return length_; }

    std::optional<std::size_t> index_of(std::string_view series_name) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::string name_;
    std::vector<AttributeSeries> series_;
    std::size_t length_ = 0;
};

enum class DataFormat { Csv };

enum class Normalization { MinMax, ZScoreClamped };

std::string_view to_string(Normalization method) noexcept;
std::optional<Normalization> parse_normalization(std::string_view text) noexcept;

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FileNotFound : public DatasetError {
public:
    explicit FileNotFound(const std::filesystem::path& path);
};

class ParseError : public DatasetError {
public:
    /// row and col are 1-based positions in the file (the header is row 1).
    ParseError(std::size_t row, std::size_t col, std::string text, std::string_view reason);

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }
    const std::string& text() const noexcept { return text_; }

private:
    std::size_t row_;
    std::size_t col_;
    std::string text_;
};

class EmptyDataset : public DatasetError {
public:
    using DatasetError::DatasetError;
};

/// Deterministic track color: a hash of (dataset name, series index, seed)
/// picks a hue; saturation and lightness are fixed.
Rgb series_color(std::string_view dataset_name, std::size_t index, std::uint32_t seed);

/// Parses CSV text: a header row of names followed by numeric rows.
/// No quoting; blank cells are an error.
Dataset parse_csv(std::string_view text, std::string name, std::uint32_t color_seed = 0);

/// The dataset name is the file stem.
Dataset load_dataset(const std::filesystem::path& path,
                     DataFormat format = DataFormat::Csv,
                     std::uint32_t color_seed = 0);

/// Maps the value at `index` into [0, 1]. Throws std::out_of_range.
double normalize(const AttributeSeries& series, Normalization method, std::size_t index);

/// Same mapping for an arbitrary raw value against the series statistics.
double normalize_value(const AttributeSeries& series, Normalization method, double value) noexcept;

}  // namespace sonify
