#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mixsiam::data {

// C×H×W planar image with values in [0, 1].
struct Image {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> pixels;

    static Image blank(std::size_t channels, std::size_t height, std::size_t width, float fill = 0.0f);

    float at(std::size_t c, std::size_t y, std::size_t x) const { return pixels[(c * height + y) * width + x]; }
    float& at(std::size_t c, std::size_t y, std::size_t x) { return pixels[(c * height + y) * width + x]; }
    std::size_t size() const { return pixels.size(); }
    bool same_shape(const Image& other) const {
        return channels == other.channels && height == other.height && width == other.width;
    }
};

struct ImageRecord {
    Image pixels;
    std::size_t label = 0;
    std::size_t source_index = 0;
};

struct Dataset {
    std::string name;
    std::size_t class_count = 0;
    std::vector<ImageRecord> records;

    std::size_t size() const { return records.size(); }
    std::size_t channels() const { return records.front().pixels.channels; }
    std::size_t height() const { return records.front().pixels.height; }
    std::size_t width() const { return records.front().pixels.width; }
    std::vector<std::size_t> labels() const;

    // Throws ConfigError if empty, shapes disagree, labels are out of range
    // or a pixel leaves [0, 1].
    void validate() const;
};

// Exact conversions between stored bytes and unit-range pixels.
float byte_to_unit(std::uint8_t b);
std::uint8_t unit_to_byte(float v);

// Record indices per batch for one epoch. The order is a permutation seeded by
// (seed, epoch); a final batch shorter than batch_size is dropped.
std::vector<std::vector<std::size_t>> batches(const Dataset& ds, std::size_t batch_size, std::uint64_t seed,
                                              std::uint64_t epoch);

}  // namespace mixsiam::data
