#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mixsiam/core/rng.hpp"
#include "mixsiam/data/synthetic.hpp"
#include "mixsiam/train/config.hpp"

namespace mixsiam::testing {

// Central difference of f around x[i], restoring x[i] afterwards.
template <typename T>
double central_difference(const std::function<double()>& f, T& xi, double h) {
    const T saved = xi;
    xi = static_cast<T>(static_cast<double>(saved) + h);
    const double up = f();
    xi = static_cast<T>(static_cast<double>(saved) - h);
    const double down = f();
    xi = saved;
    return (up - down) / (2.0 * h);
}

// |a − b| relative to the larger magnitude; values below `floor` in both
// are compared absolutely against floor.
inline double relative_error(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::uint64_t ulp_distance(float a, float b) {
    auto key = [](float v) {
        const auto u = std::bit_cast<std::uint32_t>(v);
        return (u & 0x80000000u) ? static_cast<std::int64_t>(0x80000000u) - static_cast<std::int64_t>(u & 0x7fffffffu)
                                 : static_cast<std::int64_t>(0x80000000u) + static_cast<std::int64_t>(u);
    };
    const auto d = key(a) - key(b);
    return static_cast<std::uint64_t>(d < 0 ? -d : d);
}

inline std::uint64_t ulp_distance(double a, double b) {
    auto key = [](double v) {
        const auto u = std::bit_cast<std::uint64_t>(v);
        const std::uint64_t sign = 0x8000000000000000ull;
        return (u & sign) ? sign - (u & ~sign) : sign + u;
    };
    const auto ka = key(a), kb = key(b);
    return ka > kb ? ka - kb : kb - ka;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        Rng rng{fnv1a(tag), static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())};
        path_ = std::filesystem::temp_directory_path() / ("mixsiam_" + tag + "_" + std::to_string(rng.next_u64() % 1000000007));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// A model small enough for finite differences: two conv stages, 8-d embedding.
inline train::TrainConfig tiny_config() {
    auto cfg = train::TrainConfig::small();
    cfg.encoder.input_size = 8;
    cfg.encoder.stages = {{4, 2}, {6, 2}};
    cfg.encoder.projector = {8, 8, 8};
    cfg.predictor = {4, 8};
    cfg.augment.output_size = 8;
    cfg.batch_size = 4;
    cfg.epochs = 2;
    return cfg;
}

inline data::Dataset tiny_dataset(std::size_t per_class = 4, std::size_t size = 8, std::uint64_t seed = 3) {
    data::SyntheticConfig sc;
    sc.per_class = per_class;
    sc.size = size;
    sc.seed = seed;
    return data::make_synthetic(sc);
}

}  // namespace mixsiam::testing
