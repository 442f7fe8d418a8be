#include "mixsiam/kernels/im2col.hpp"

#include <cstdint>

#include "mixsiam/kernels/parallel.hpp"

namespace mixsiam::kernels {

bool ConvGeometry::valid() const {
    return stride >= 1 && kernel_h >= 1 && kernel_w >= 1 && height + 2 * padding >= kernel_h &&
           width + 2 * padding >= kernel_w;
}

namespace {

constexpr std::size_t kParallelThreshold = 1 << 14;

bool go_parallel(const ConvGeometry& g) {
    return !strict_deterministic() && g.patch_size() * g.columns() >= kParallelThreshold;
}

// Fills one row (c, ki, kj) of the column matrix.
template <typename T>
void unfold_row(const T* input, const ConvGeometry& g, std::size_t r, T* row) {
    const std::size_t kw = r % g.kernel_w;
    const std::size_t kh = (r / g.kernel_w) % g.kernel_h;
    const std::size_t c = r / (g.kernel_w * g.kernel_h);
    const std::size_t ho = g.out_height(), wo = g.out_width();
    const std::size_t plane = g.height * g.width;
    for (std::size_t b = 0; b < g.batch; ++b) {
        const T* src = input + (b * g.channels + c) * plane;
        T* dst = row + b * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
            const auto iy = static_cast<std::int64_t>(oy * g.stride + kh) - static_cast<std::int64_t>(g.padding);
            for (std::size_t ox = 0; ox < wo; ++ox) {
                const auto ix = static_cast<std::int64_t>(ox * g.stride + kw) - static_cast<std::int64_t>(g.padding);
                const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::int64_t>(g.height) &&
                                    ix < static_cast<std::int64_t>(g.width);
                dst[oy * wo + ox] = inside ? src[iy * g.width + ix] : T(0);
            }
        }
    }
}

// Accumulates every column entry belonging to image plane (b, c), in
// (ki, kj, oy, ox) order.
template <typename T>
void fold_plane(const T* cols, const ConvGeometry& g, std::size_t b, std::size_t c, T* grad) {
    const std::size_t ho = g.out_height(), wo = g.out_width();
    const std::size_t ncols = g.columns();
    T* dst = grad + (b * g.channels + c) * g.height * g.width;
    for (std::size_t kh = 0; kh < g.kernel_h; ++kh) {
        for (std::size_t kw = 0; kw < g.kernel_w; ++kw) {
            const std::size_t r = (c * g.kernel_h + kh) * g.kernel_w + kw;
            const T* src = cols + r * ncols + b * ho * wo;
            for (std::size_t oy = 0; oy < ho; ++oy) {
                const auto iy = static_cast<std::int64_t>(oy * g.stride + kh) - static_cast<std::int64_t>(g.padding);
                if (iy < 0 || iy >= static_cast<std::int64_t>(g.height)) continue;
                for (std::size_t ox = 0; ox < wo; ++ox) {
                    const auto ix = static_cast<std::int64_t>(ox * g.stride + kw) - static_cast<std::int64_t>(g.padding);
                    if (ix < 0 || ix >= static_cast<std::int64_t>(g.width)) continue;
                    dst[iy * g.width + ix] += src[oy * wo + ox];
                }
            }
        }
    }
}

}  // namespace

template <typename T>
void im2col(std::span<const T> input, const ConvGeometry& g, std::span<T> cols) {
    const auto rows = static_cast<std::int64_t>(g.patch_size());
    const std::size_t ncols = g.columns();
#pragma omp parallel for schedule(static) if (go_parallel(g))
    for (std::int64_t r = 0; r < rows; ++r) {
        unfold_row(input.data(), g, static_cast<std::size_t>(r), cols.data() + r * ncols);
    }
}

template <typename T>
void col2im_add(std::span<const T> cols, const ConvGeometry& g, std::span<T> input_grad) {
    const auto planes = static_cast<std::int64_t>(g.batch * g.channels);
#pragma omp parallel for schedule(static) if (go_parallel(g))
    for (std::int64_t p = 0; p < planes; ++p) {
        const auto b = static_cast<std::size_t>(p) / g.channels;
        const auto c = static_cast<std::size_t>(p) % g.channels;
        fold_plane(cols.data(), g, b, c, input_grad.data());
    }
}

namespace serial {

template <typename T>
void im2col(std::span<const T> input, const ConvGeometry& g, std::span<T> cols) {
    for (std::size_t r = 0; r < g.patch_size(); ++r) unfold_row(input.data(), g, r, cols.data() + r * g.columns());
}

template <typename T>
void col2im_add(std::span<const T> cols, const ConvGeometry& g, std::span<T> input_grad) {
    for (std::size_t b = 0; b < g.batch; ++b)
        for (std::size_t c = 0; c < g.channels; ++c) fold_plane(cols.data(), g, b, c, input_grad.data());
}

}  // namespace serial

template void im2col<float>(std::span<const float>, const ConvGeometry&, std::span<float>);
template void im2col<double>(std::span<const double>, const ConvGeometry&, std::span<double>);
template void col2im_add<float>(std::span<const float>, const ConvGeometry&, std::span<float>);
template void col2im_add<double>(std::span<const double>, const ConvGeometry&, std::span<double>);
template void serial::im2col<float>(std::span<const float>, const ConvGeometry&, std::span<float>);
template void serial::im2col<double>(std::span<const double>, const ConvGeometry&, std::span<double>);
template void serial::col2im_add<float>(std::span<const float>, const ConvGeometry&, std::span<float>);
template void serial::col2im_add<double>(std::span<const double>, const ConvGeometry&, std::span<double>);

}  // namespace mixsiam::kernels
