#pragma once

#include <cstddef>
#include <span>

namespace mixsiam::kernels {

struct ConvGeometry {
    std::size_t batch = 1;
    std::size_t channels = 1;
    std::size_t height = 1;
    std::size_t width = 1;
    std::size_t kernel_h = 1;
    std::size_t kernel_w = 1;
    std::size_t stride = 1;
    std::size_t padding = 0;

    std::size_t out_height() const { return (height + 2 * padding - kernel_h) / stride + 1; }
    std::size_t out_width() const { return (width + 2 * padding - kernel_w) / stride + 1; }
    std::size_t patch_size() const { return channels * kernel_h * kernel_w; }
    std::size_t out_pixels() const { return out_height() * out_width(); }
    // Number of columns in the batched column matrix.
    std::size_t columns() const { return batch * out_pixels(); }
    // False when the kernel does not fit the padded input.
    bool valid() const;
};

// Unfolds a B×C×H×W input into a (C·kh·kw) × (B·Ho·Wo) matrix; out-of-bounds
// taps read as zero.
template <typename T>
void im2col(std::span<const T> input, const ConvGeometry& g, std::span<T> cols);

// Adjoint of im2col: scatters the column matrix back and adds into input_grad.
template <typename T>
void col2im_add(std::span<const T> cols, const ConvGeometry& g, std::span<T> input_grad);

namespace serial {
template <typename T>
void im2col(std::span<const T> input, const ConvGeometry& g, std::span<T> cols);
template <typename T>
void col2im_add(std::span<const T> cols, const ConvGeometry& g, std::span<T> input_grad);
}  // namespace serial

}  // namespace mixsiam::kernels
