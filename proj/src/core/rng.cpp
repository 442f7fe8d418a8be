#include "mixsiam/core/rng.hpp"

#include <cmath>
#include <numbers>
#include <string_view>
#include <vector>

namespace mixsiam {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::seed_seq make_seed_seq(std::span<const std::uint64_t> key, std::vector<std::uint32_t>& words) {
    words.clear();
    for (std::uint64_t k : key) {
        const std::uint64_t mixed = splitmix64(k);
        words.push_back(static_cast<std::uint32_t>(mixed));
        words.push_back(static_cast<std::uint32_t>(mixed >> 32));
    }
    return std::seed_seq(words.begin(), words.end());
}

}  // namespace

std::uint64_t hash_words(std::span<const std::uint64_t> words) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t w : words) {
        h = splitmix64(h ^ splitmix64(w));
    }
    return h;
}

std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
    return hash_words(std::span<const std::uint64_t>(words.begin(), words.size()));
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng::Rng(std::initializer_list<std::uint64_t> key)
    : Rng(std::span<const std::uint64_t>(key.begin(), key.size())) {}

Rng::Rng(std::span<const std::uint64_t> key) {
    std::vector<std::uint32_t> words;
    auto seq = make_seed_seq(key, words);
    engine_.seed(seq);
}

std::size_t Rng::below(std::size_t n) {
    // Lemire-free simple rejection; n is small everywhere we use it.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::beta(double alpha) {
    // Marsaglia-Tsang gamma sampler, shape boosted by one for alpha < 1.
    auto gamma = [this](double shape) {
        double boost = 1.0;
        if (shape < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            boost = std::pow(u, 1.0 / shape);
            shape += 1.0;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v;
        }
    };
    const double a = gamma(alpha);
    const double b = gamma(alpha);
    return a / (a + b);
}

}  // namespace mixsiam
