#pragma once

#include <cstddef>
#include <cstdint>

#include "mixsiam/data/dataset.hpp"

namespace mixsiam::data {

// Labeled toy images. Each class is a distinct spatial pattern (stripes,
// checkerboard, rings, ...) drawn light-on-dark; per-sample nuisances are the
// two brightness levels, a small color tint, the pattern frequency (1.5 to 6
// cycles), its phase and additive noise. The class survives cropping,
// flipping and color distortion; most of the nuisances do not.
struct SyntheticConfig {
    std::size_t classes = 3;
    std::size_t per_class = 100;
    std::size_t size = 32;
    std::uint64_t seed = 7;
    double noise = 0.04;

    void validate() const;
};

inline constexpr std::size_t kSyntheticMaxClasses = 8;

Dataset make_synthetic(const SyntheticConfig& config);

}  // namespace mixsiam::data
