#include "mixsiam/augment/augment.hpp"

#include <algorithm>
#include <cmath>

#include "mixsiam/core/error.hpp"

namespace mixsiam::augment {

namespace {

void require_probability(const char* field, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("augment.") + field + " must be in [0,1]");
}

double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

// Reflection without repeating the edge sample (…2 1 | 0 1 2 … n-1 | n-2 …).
std::size_t reflect(std::int64_t i, std::size_t n) {
    if (n == 1) return 0;
    const auto period = static_cast<std::int64_t>(2 * (n - 1));
    i %= period;
    if (i < 0) i += period;
    if (i >= static_cast<std::int64_t>(n)) i = period - i;
    return static_cast<std::size_t>(i);
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    v = mx;
    s = mx > 0.0 ? delta / mx : 0.0;
    if (delta <= 0.0) {
        h = 0.0;
        return;
    }
    if (mx == r) {
        h = (g - b) / delta;
    } else if (mx == g) {
        h = 2.0 + (b - r) / delta;
    } else {
        h = 4.0 + (r - g) / delta;
    }
    h /= 6.0;
    h -= std::floor(h);
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    const double h6 = h * 6.0;
    const double sector = std::floor(h6);
    const double f = h6 - sector;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (static_cast<int>(sector) % 6) {
        case 0: r = v, g = t, b = p; break;
        case 1: r = q, g = v, b = p; break;
        case 2: r = p, g = v, b = t; break;
        case 3: r = p, g = q, b = v; break;
        case 4: r = t, g = p, b = v; break;
        default: r = v, g = p, b = q; break;
    }
}

double draw_factor(Rng& rng, double strength) {
    return rng.uniform(std::max(0.0, 1.0 - strength), 1.0 + strength);
}

}  // namespace

void AugmentConfig::validate() const {
    if (!(crop_scale.lo > 0.0 && crop_scale.lo <= crop_scale.hi && crop_scale.hi <= 1.0)) {
        throw ConfigError("augment.crop_scale must satisfy 0 < lo <= hi <= 1");
    }
    if (!(aspect_ratio.lo > 0.0 && aspect_ratio.lo <= aspect_ratio.hi)) {
        throw ConfigError("augment.aspect_ratio must satisfy 0 < lo <= hi");
    }
    if (output_size < 8) throw ConfigError("augment.output_size must be at least 8");
    require_probability("hflip_prob", hflip_prob);
    require_probability("jitter_prob", jitter_prob);
    require_probability("grayscale_prob", grayscale_prob);
    require_probability("blur_prob", blur_prob);
    if (jitter.brightness < 0 || jitter.contrast < 0 || jitter.saturation < 0 || jitter.hue < 0 || jitter.hue > 0.5) {
        throw ConfigError("augment.jitter strengths must be non-negative, hue at most 0.5");
    }
    if (!(blur_sigma.lo > 0.0 && blur_sigma.lo <= blur_sigma.hi)) {
        throw ConfigError("augment.blur_sigma must satisfy 0 < lo <= hi");
    }
}

AugmentConfig AugmentConfig::identity(std::size_t output_size) {
    AugmentConfig cfg;
    cfg.crop_scale = {1.0, 1.0};
    cfg.aspect_ratio = {1.0, 1.0};
    cfg.output_size = output_size;
    cfg.hflip_prob = 0.0;
    cfg.jitter_prob = 0.0;
    cfg.grayscale_prob = 0.0;
    cfg.blur_prob = 0.0;
    return cfg;
}

CropBox sample_crop(std::size_t height, std::size_t width, const AugmentConfig& cfg, Rng& rng) {
    const double area = static_cast<double>(height * width);
    for (int attempt = 0; attempt < 10; ++attempt) {
        const double target = area * rng.uniform(cfg.crop_scale.lo, cfg.crop_scale.hi);
        const double aspect = rng.uniform(cfg.aspect_ratio.lo, cfg.aspect_ratio.hi);
        const auto w = static_cast<std::size_t>(std::lround(std::sqrt(target * aspect)));
        const auto h = static_cast<std::size_t>(std::lround(std::sqrt(target / aspect)));
        if (w > 0 && h > 0 && w <= width && h <= height) {
            CropBox box{0, 0, h, w};
            box.top = rng.below(height - h + 1);
            box.left = rng.below(width - w + 1);
            return box;
        }
    }
    // Fallback: largest centered crop within the aspect bounds.
    const double in_ratio = static_cast<double>(width) / static_cast<double>(height);
    std::size_t w = width, h = height;
    if (in_ratio < cfg.aspect_ratio.lo) {
        h = static_cast<std::size_t>(std::lround(static_cast<double>(w) / cfg.aspect_ratio.lo));
    } else if (in_ratio > cfg.aspect_ratio.hi) {
        w = static_cast<std::size_t>(std::lround(static_cast<double>(h) * cfg.aspect_ratio.hi));
    }
    h = std::clamp<std::size_t>(h, 1, height);
    w = std::clamp<std::size_t>(w, 1, width);
    return CropBox{(height - h) / 2, (width - w) / 2, h, w};
}

Image crop_resize(const Image& img, const CropBox& box, std::size_t out_h, std::size_t out_w) {
    Image out = Image::blank(img.channels, out_h, out_w);
    const double sy = static_cast<double>(box.height) / static_cast<double>(out_h);
    const double sx = static_cast<double>(box.width) / static_cast<double>(out_w);
    for (std::size_t dy = 0; dy < out_h; ++dy) {
        const double fy = std::clamp((static_cast<double>(dy) + 0.5) * sy - 0.5, 0.0, static_cast<double>(box.height - 1));
        const auto y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, box.height - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t dx = 0; dx < out_w; ++dx) {
            const double fx = std::clamp((static_cast<double>(dx) + 0.5) * sx - 0.5, 0.0, static_cast<double>(box.width - 1));
            const auto x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, box.width - 1);
            const double wx = fx - static_cast<double>(x0);
            for (std::size_t c = 0; c < img.channels; ++c) {
                const double p00 = img.at(c, box.top + y0, box.left + x0);
                const double p01 = img.at(c, box.top + y0, box.left + x1);
                const double p10 = img.at(c, box.top + y1, box.left + x0);
                const double p11 = img.at(c, box.top + y1, box.left + x1);
                const double top = p00 + (p01 - p00) * wx;
                const double bottom = p10 + (p11 - p10) * wx;
                out.at(c, dy, dx) = static_cast<float>(top + (bottom - top) * wy);
            }
        }
    }
    return out;
}

Image resize_bilinear(const Image& img, std::size_t out_h, std::size_t out_w) {
    return crop_resize(img, CropBox{0, 0, img.height, img.width}, out_h, out_w);
}

void hflip(Image& img) {
    for (std::size_t c = 0; c < img.channels; ++c)
        for (std::size_t y = 0; y < img.height; ++y)
            std::reverse(img.pixels.begin() + static_cast<std::ptrdiff_t>((c * img.height + y) * img.width),
                         img.pixels.begin() + static_cast<std::ptrdiff_t>((c * img.height + y + 1) * img.width));
}

void clamp_unit(Image& img) {
    for (float& v : img.pixels) v = std::clamp(v, 0.0f, 1.0f);
}

void adjust_brightness(Image& img, double factor) {
    for (float& v : img.pixels) v = static_cast<float>(std::clamp(v * factor, 0.0, 1.0));
}

void adjust_contrast(Image& img, double factor) {
    double mean = 0.0;
    const std::size_t plane = img.height * img.width;
    if (img.channels == 3) {
        for (std::size_t i = 0; i < plane; ++i)
            mean += luma(img.pixels[i], img.pixels[plane + i], img.pixels[2 * plane + i]);
    } else {
        for (std::size_t i = 0; i < plane; ++i) mean += img.pixels[i];
    }
    mean /= static_cast<double>(plane);
    for (float& v : img.pixels) v = static_cast<float>(std::clamp(factor * v + (1.0 - factor) * mean, 0.0, 1.0));
}

void adjust_saturation(Image& img, double factor) {
    if (img.channels != 3) return;
    const std::size_t plane = img.height * img.width;
    for (std::size_t i = 0; i < plane; ++i) {
        const double gray = luma(img.pixels[i], img.pixels[plane + i], img.pixels[2 * plane + i]);
        for (std::size_t c = 0; c < 3; ++c) {
            float& v = img.pixels[c * plane + i];
            v = static_cast<float>(std::clamp(factor * v + (1.0 - factor) * gray, 0.0, 1.0));
        }
    }
}

void adjust_hue(Image& img, double shift) {
    if (img.channels != 3 || shift == 0.0) return;
    const std::size_t plane = img.height * img.width;
    for (std::size_t i = 0; i < plane; ++i) {
        double h, s, v;
        rgb_to_hsv(img.pixels[i], img.pixels[plane + i], img.pixels[2 * plane + i], h, s, v);
        h += shift;
        h -= std::floor(h);
        double r, g, b;
        hsv_to_rgb(h, s, v, r, g, b);
        img.pixels[i] = static_cast<float>(std::clamp(r, 0.0, 1.0));
        img.pixels[plane + i] = static_cast<float>(std::clamp(g, 0.0, 1.0));
        img.pixels[2 * plane + i] = static_cast<float>(std::clamp(b, 0.0, 1.0));
    }
}

void to_grayscale(Image& img) {
    if (img.channels != 3) return;
    const std::size_t plane = img.height * img.width;
    for (std::size_t i = 0; i < plane; ++i) {
        const auto gray = static_cast<float>(
            std::clamp(luma(img.pixels[i], img.pixels[plane + i], img.pixels[2 * plane + i]), 0.0, 1.0));
        for (std::size_t c = 0; c < 3; ++c) img.pixels[c * plane + i] = gray;
    }
}

std::vector<double> gaussian_kernel(double sigma) {
    const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double total = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double d = static_cast<double>(i) - static_cast<double>(radius);
        k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        total += k[i];
    }
    for (double& v : k) v /= total;
    return k;
}

void gaussian_blur(Image& img, double sigma) {
    const auto kernel = gaussian_kernel(sigma);
    const auto radius = static_cast<std::int64_t>(kernel.size() / 2);
    std::vector<double> tmp(img.height * img.width);
    for (std::size_t c = 0; c < img.channels; ++c) {
        for (std::size_t y = 0; y < img.height; ++y)
            for (std::size_t x = 0; x < img.width; ++x) {
                double acc = 0.0;
                for (std::int64_t t = -radius; t <= radius; ++t)
                    acc += kernel[static_cast<std::size_t>(t + radius)] *
                           img.at(c, y, reflect(static_cast<std::int64_t>(x) + t, img.width));
                tmp[y * img.width + x] = acc;
            }
        for (std::size_t y = 0; y < img.height; ++y)
            for (std::size_t x = 0; x < img.width; ++x) {
                double acc = 0.0;
                for (std::int64_t t = -radius; t <= radius; ++t)
                    acc += kernel[static_cast<std::size_t>(t + radius)] *
                           tmp[reflect(static_cast<std::int64_t>(y) + t, img.height) * img.width + x];
                img.at(c, y, x) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
            }
    }
}

Image augment_view(const Image& img, const AugmentConfig& cfg, Rng& rng) {
    const CropBox box = sample_crop(img.height, img.width, cfg, rng);
    Image out = crop_resize(img, box, cfg.output_size, cfg.output_size);
    // Each stage draws its coin even when disabled so that toggling one
    // probability does not shift the random stream of later stages.
    if (rng.bernoulli(cfg.hflip_prob)) hflip(out);
    const bool jitter = rng.bernoulli(cfg.jitter_prob);
    const double brightness = draw_factor(rng, cfg.jitter.brightness);
    const double contrast = draw_factor(rng, cfg.jitter.contrast);
    const double saturation = draw_factor(rng, cfg.jitter.saturation);
    const double hue = rng.uniform(-cfg.jitter.hue, cfg.jitter.hue);
    if (jitter) {
        adjust_brightness(out, brightness);
        adjust_contrast(out, contrast);
        adjust_saturation(out, saturation);
        adjust_hue(out, hue);
    }
    if (rng.bernoulli(cfg.grayscale_prob)) to_grayscale(out);
    const bool blur = rng.bernoulli(cfg.blur_prob);
    const double sigma = rng.uniform(cfg.blur_sigma.lo, cfg.blur_sigma.hi);
    if (blur) gaussian_blur(out, sigma);
    clamp_unit(out);
    return out;
}

Image mix(const Image& x1, const Image& x2, double lambda_mix) {
    if (!x1.same_shape(x2)) throw DimensionError("mix: images differ in shape");
    if (!(lambda_mix >= 0.0 && lambda_mix <= 1.0)) {
        throw ConfigError("lambda_mix must be in [0,1], got " + std::to_string(lambda_mix));
    }
    // The larger weight is taken as given and the smaller one as 1 minus it,
    // which is exact; both argument orders then see the same weight pair.
    double w1, w2;
    if (lambda_mix >= 0.5) {
        w1 = lambda_mix;
        w2 = 1.0 - lambda_mix;
    } else {
        w2 = 1.0 - lambda_mix;
        w1 = 1.0 - w2;
    }
    Image out = Image::blank(x1.channels, x1.height, x1.width);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        out.pixels[i] = static_cast<float>(w1 * x1.pixels[i] + w2 * x2.pixels[i]);
    }
    return out;
}

void LambdaMixPolicy::validate() const {
    if (kind == Kind::Fixed && !(value >= 0.0 && value <= 1.0)) {
        throw ConfigError("lambda_mix must be in [0,1], got " + std::to_string(value));
    }
    if (kind == Kind::Beta && !(alpha > 0.0)) throw ConfigError("lambda_mix beta alpha must be positive");
}

double LambdaMixPolicy::draw(Rng& rng) const {
    switch (kind) {
        case Kind::Fixed: return value;
        case Kind::Beta: return rng.beta(alpha);
        case Kind::PickOneView: return rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    return value;
}

ViewTriplet make_triplet(const data::ImageRecord& record, const AugmentConfig& cfg, const LambdaMixPolicy& policy,
                         std::uint64_t seed, std::uint64_t epoch) {
    Rng view1{seed, cfg.seed, epoch, record.source_index, 1};
    Rng view2{seed, cfg.seed, epoch, record.source_index, 2};
    Rng mixing{seed, cfg.seed, epoch, record.source_index, 3};
    ViewTriplet t;
    t.source_index = record.source_index;
    t.x1 = augment_view(record.pixels, cfg, view1);
    t.x2 = augment_view(record.pixels, cfg, view2);
    t.lambda_mix = policy.draw(mixing);
    t.xm = mix(t.x1, t.x2, t.lambda_mix);
    return t;
}

}  // namespace mixsiam::augment
