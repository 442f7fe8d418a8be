#include "mixsiam/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "mixsiam/core/error.hpp"
#include "mixsiam/core/rng.hpp"

namespace mixsiam::data {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PatternParams {
    double frequency;  // cycles across the image
    double phase_u;
    double phase_v;
};

// Pattern intensity in [0, 1] at normalized coordinates (u, v) ∈ [0,1)².
// Every pattern is symmetric under horizontal flip up to phase.
double pattern(std::size_t cls, double u, double v, const PatternParams& p) {
    const double f = p.frequency;
    const double du = u - 0.5, dv = v - 0.5;
    switch (cls) {
        case 0: return 0.5 + 0.5 * std::sin(kTwoPi * f * v + p.phase_v);
        case 1: return 0.5 + 0.5 * std::sin(kTwoPi * f * u + p.phase_u);
        case 2: return 0.5 + 0.5 * std::sin(kTwoPi * f * u + p.phase_u) * std::sin(kTwoPi * f * v + p.phase_v);
        case 3: return 0.5 + 0.5 * std::sin(kTwoPi * f * std::hypot(du, dv) * 1.5 + p.phase_u);
        case 4:
            return 0.5 + 0.5 * std::sin(kTwoPi * f * 0.7 * (u + v) + p.phase_u) *
                             std::sin(kTwoPi * f * 0.7 * (u - v) + p.phase_v);
        case 5: return std::exp(-(du * du + dv * dv) / (2.0 * 0.18 * 0.18));
        case 6: {
            const double edge = std::max(std::abs(du), std::abs(dv));
            return edge > 0.28 && edge < 0.40 ? 1.0 : 0.0;
        }
        default: {
            const double s = std::sin(kTwoPi * f * u + p.phase_u) + std::sin(kTwoPi * f * v + p.phase_v);
            return s > 1.0 ? 1.0 : 0.0;
        }
    }
}

}  // namespace

void SyntheticConfig::validate() const {
    if (classes < 2 || classes > kSyntheticMaxClasses) {
        throw ConfigError("synthetic.classes must be in [2, " + std::to_string(kSyntheticMaxClasses) + "], got " +
                          std::to_string(classes));
    }
    if (per_class < 1) throw ConfigError("synthetic.per_class must be at least 1");
    if (size < 8) throw ConfigError("synthetic.size must be at least 8, got " + std::to_string(size));
    if (!(noise >= 0.0)) throw ConfigError("synthetic.noise must be non-negative");
}

Dataset make_synthetic(const SyntheticConfig& config) {
    config.validate();
    Dataset ds;
    ds.name = "synthetic";
    ds.class_count = config.classes;
    const std::size_t total = config.classes * config.per_class;
    ds.records.resize(total);
    const std::size_t s = config.size;
    for (std::size_t i = 0; i < total; ++i) {
        Rng rng{config.seed, i, 0x53594e5448ULL};
        ImageRecord& rec = ds.records[i];
        rec.label = i % config.classes;
        rec.source_index = i;

        // Light pattern on a dark ground with a small random tint per channel.
        const double hi = rng.uniform(0.55, 0.95), lo = rng.uniform(0.05, 0.45);
        std::array<double, 3> fg{}, bg{};
        for (std::size_t c = 0; c < 3; ++c) {
            const double tint = rng.uniform(-0.1, 0.1);
            fg[c] = hi + tint;
            bg[c] = lo + tint;
        }

        const PatternParams params{rng.uniform(1.5, 6.0), rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi)};
        rec.pixels = Image::blank(3, s, s);
        for (std::size_t y = 0; y < s; ++y) {
            for (std::size_t x = 0; x < s; ++x) {
                const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(s);
                const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(s);
                const double t = pattern(rec.label, u, v, params);
                for (std::size_t c = 0; c < 3; ++c) {
                    const double value = bg[c] + (fg[c] - bg[c]) * t + config.noise * rng.normal();
                    rec.pixels.at(c, y, x) = static_cast<float>(std::clamp(value, 0.0, 1.0));
                }
            }
        }
    }
    return ds;
}

}  // namespace mixsiam::data
