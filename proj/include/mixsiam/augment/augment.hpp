#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "mixsiam/core/rng.hpp"
#include "mixsiam/data/dataset.hpp"

namespace mixsiam::augment {

using data::Image;

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct JitterStrengths {
    double brightness = 0.4;
    double contrast = 0.4;
    double saturation = 0.4;
    double hue = 0.1;
};

// Stochastic view recipe: random resized crop, horizontal flip, color jitter
// (brightness → contrast → saturation → hue), random grayscale, Gaussian blur.
struct AugmentConfig {
    Range crop_scale{0.2, 1.0};
    Range aspect_ratio{3.0 / 4.0, 4.0 / 3.0};
    std::size_t output_size = 32;
    double hflip_prob = 0.5;
    double jitter_prob = 0.8;
    JitterStrengths jitter;
    double grayscale_prob = 0.2;
    double blur_prob = 0.5;
    Range blur_sigma{0.1, 2.0};
    std::uint64_t seed = 0;

    void validate() const;

    // Every random step disabled and the crop pinned to the full image.
    static AugmentConfig identity(std::size_t output_size);
};

struct CropBox {
    std::size_t top = 0;
    std::size_t left = 0;
    std::size_t height = 0;
    std::size_t width = 0;
};

CropBox sample_crop(std::size_t height, std::size_t width, const AugmentConfig& cfg, Rng& rng);

// Half-pixel-centered bilinear resample of a region to out_h × out_w.
Image crop_resize(const Image& img, const CropBox& box, std::size_t out_h, std::size_t out_w);
Image resize_bilinear(const Image& img, std::size_t out_h, std::size_t out_w);

void hflip(Image& img);
void adjust_brightness(Image& img, double factor);
void adjust_contrast(Image& img, double factor);
void adjust_saturation(Image& img, double factor);
// Rotates hue by `shift` turns (shift ∈ [-0.5, 0.5]).
void adjust_hue(Image& img, double shift);
// Luma 0.299 R + 0.587 G + 0.114 B written to every channel.
void to_grayscale(Image& img);
// Normalized kernel of radius ceil(3σ).
std::vector<double> gaussian_kernel(double sigma);
void gaussian_blur(Image& img, double sigma);
void clamp_unit(Image& img);

Image augment_view(const Image& img, const AugmentConfig& cfg, Rng& rng);

// λ·x1 + (1−λ)·x2. mix(a, b, λ) and mix(b, a, 1−λ) produce identical bits.
Image mix(const Image& x1, const Image& x2, double lambda_mix);

struct LambdaMixPolicy {
    enum class Kind {
        Fixed,        // always `value`
        Beta,         // Beta(alpha, alpha), drawn per image
        PickOneView,  // 0 or 1 with equal odds: x_m is one of the two views
    };
    Kind kind = Kind::Fixed;
    double value = 0.5;
    double alpha = 1.0;

    void validate() const;
    double draw(Rng& rng) const;
};

struct ViewTriplet {
    Image x1;
    Image x2;
    Image xm;
    double lambda_mix = 0.5;
    std::size_t source_index = 0;
};

// Randomness is keyed by (seed, cfg.seed, epoch, source_index, view slot), so a
// triplet does not depend on batch composition or worker scheduling.
ViewTriplet make_triplet(const data::ImageRecord& record, const AugmentConfig& cfg, const LambdaMixPolicy& policy,
                         std::uint64_t seed, std::uint64_t epoch);

}  // namespace mixsiam::augment
