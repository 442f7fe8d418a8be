#include "mixsiam/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixsiam/core/error.hpp"
#include "mixsiam/core/rng.hpp"

namespace mixsiam::data {

Image Image::blank(std::size_t channels, std::size_t height, std::size_t width, float fill) {
    Image img;
    img.channels = channels;
    img.height = height;
    img.width = width;
    img.pixels.assign(channels * height * width, fill);
    return img;
}

std::vector<std::size_t> Dataset::labels() const {
    std::vector<std::size_t> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.label);
    return out;
}

void Dataset::validate() const {
    if (records.empty()) throw ConfigError("dataset '" + name + "' is empty");
    const Image& first = records.front().pixels;
    for (const auto& r : records) {
        if (!r.pixels.same_shape(first) || r.pixels.size() != first.channels * first.height * first.width) {
            throw ConfigError("dataset '" + name + "': record " + std::to_string(r.source_index) +
                              " has a different image shape");
        }
        if (r.label >= class_count) {
            throw ConfigError("dataset '" + name + "': label " + std::to_string(r.label) + " >= class count " +
                              std::to_string(class_count));
        }
        for (float v : r.pixels.pixels) {
            if (!(v >= 0.0f && v <= 1.0f)) {
                throw ConfigError("dataset '" + name + "': pixel outside [0,1] in record " +
                                  std::to_string(r.source_index));
            }
        }
    }
}

float byte_to_unit(std::uint8_t b) { return static_cast<float>(static_cast<double>(b) / 255.0); }

std::uint8_t unit_to_byte(float v) {
    const double scaled = std::clamp(static_cast<double>(v), 0.0, 1.0) * 255.0;
    return static_cast<std::uint8_t>(std::lround(scaled));
}

std::vector<std::vector<std::size_t>> batches(const Dataset& ds, std::size_t batch_size, std::uint64_t seed,
                                              std::uint64_t epoch) {
    if (batch_size < 2) {
        throw ConfigError("batch_size must be at least 2 (batch-norm statistics), got " + std::to_string(batch_size));
    }
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng{seed, epoch, 0x5348554646ULL};
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start + batch_size <= order.size(); start += batch_size) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(start + batch_size));
    }
    return out;
}

}  // namespace mixsiam::data
