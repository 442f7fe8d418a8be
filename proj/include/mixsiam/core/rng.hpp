#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace mixsiam {

// Mixes a list of 64-bit words into one; used to key random streams and
// derive per-cell seeds. Order-sensitive.
std::uint64_t hash_words(std::span<const std::uint64_t> words);
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words);

// FNV-1a over bytes.
std::uint64_t fnv1a(std::string_view bytes);

// Random stream keyed by a tuple of integers. Two streams built from the same
// key produce the same sequence on every platform: uniform and normal draws
// are derived from raw mt19937_64 output, not from std:: distributions.
class Rng {
public:
    explicit Rng(std::initializer_list<std::uint64_t> key);
    explicit Rng(std::span<const std::uint64_t> key);

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    bool bernoulli(double p) { return uniform() < p; }
    std::size_t below(std::size_t n);
    double normal();
    // Symmetric Beta(alpha, alpha) via two gamma draws.
    double beta(double alpha);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace mixsiam
