#include "mixsiam/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixsiam/core/error.hpp"
#include "mixsiam/kernels/gemm.hpp"
#include "mixsiam/kernels/im2col.hpp"

namespace mixsiam::ad {

namespace {

template <typename T>
using ImplPtr = std::shared_ptr<detail::TensorImpl<T>>;

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                             to_string(b.shape()));
    }
}

template <typename T>
void require_rank(const char* op, const Tensor<T>& a, std::size_t rank) {
    if (a.rank() != rank) {
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                             to_string(a.shape()));
    }
}

// Adds `delta` into the input's gradient when it participates in the graph.
template <typename T, typename F>
void accumulate(const ImplPtr<T>& in, F&& body) {
    if (!in->requires_grad) return;
    body(in->grad_buffer());
}

}  // namespace

template <typename T>
Tensor<T> elementwise(Elementwise op, const Tensor<T>& a, const Tensor<T>& b) {
    switch (op) {
        case Elementwise::Add: return add(a, b);
        case Elementwise::Sub: return sub(a, b);
        case Elementwise::Mul: return mul(a, b);
        case Elementwise::Max: return maximum(a, b);
    }
    throw std::invalid_argument("unknown elementwise op");
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape("add", a, b);
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    auto ia = a.impl(), ib = b.impl();
    return make_result<T>("add", a.shape(), std::move(out), {ia, ib}, [ia, ib](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
        accumulate<T>(ib, [&](auto& gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i]; });
    });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape("sub", a, b);
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    auto ia = a.impl(), ib = b.impl();
    return make_result<T>("sub", a.shape(), std::move(out), {ia, ib}, [ia, ib](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
        accumulate<T>(ib, [&](auto& gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i]; });
    });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape("mul", a, b);
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
    auto ia = a.impl(), ib = b.impl();
    return make_result<T>("mul", a.shape(), std::move(out), {ia, ib}, [ia, ib](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * ib->data[i]; });
        accumulate<T>(ib, [&](auto& gb) { for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ia->data[i]; });
    });
}

template <typename T>
Tensor<T> maximum(const Tensor<T>& a, const Tensor<T>& b) {
    require_same_shape("maximum", a, b);
    const std::size_t n = a.numel();
    std::vector<T> out(n);
    std::vector<std::uint8_t> from_a(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Ties go to the first argument.
        from_a[i] = a.data()[i] >= b.data()[i];
        out[i] = from_a[i] ? a.data()[i] : b.data()[i];
    }
    auto ia = a.impl(), ib = b.impl();
    return make_result<T>("maximum", a.shape(), std::move(out), {ia, ib},
                          [ia, ib, from_a = std::move(from_a)](std::span<const T> g) {
                              accumulate<T>(ia, [&](auto& ga) {
                                  for (std::size_t i = 0; i < g.size(); ++i) if (from_a[i]) ga[i] += g[i];
                              });
                              accumulate<T>(ib, [&](auto& gb) {
                                  for (std::size_t i = 0; i < g.size(); ++i) if (!from_a[i]) gb[i] += g[i];
                              });
                          });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * factor;
    auto ia = a.impl();
    return make_result<T>("scale", a.shape(), std::move(out), {ia}, [ia, factor](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor; });
    });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] > T(0) ? a.data()[i] : T(0);
    auto ia = a.impl();
    return make_result<T>("relu", a.shape(), std::move(out), {ia}, [ia](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) {
            for (std::size_t i = 0; i < g.size(); ++i) if (ia->data[i] > T(0)) ga[i] += g[i];
        });
    });
}

template <typename T>
Tensor<T> add_bias(const Tensor<T>& a, const Tensor<T>& bias) {
    require_rank("add_bias", a, 2);
    require_rank("add_bias", bias, 1);
    const std::size_t rows = a.dim(0), cols = a.dim(1);
    if (bias.dim(0) != cols) {
        throw DimensionError("add_bias: bias " + to_string(bias.shape()) + " does not match " + to_string(a.shape()));
    }
    std::vector<T> out(a.numel());
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = a.data()[r * cols + c] + bias.data()[c];
    auto ia = a.impl(), ib = bias.impl();
    return make_result<T>("add_bias", a.shape(), std::move(out), {ia, ib}, [ia, ib, rows, cols](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
        accumulate<T>(ib, [&](auto& gb) {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
        });
    });
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    require_rank("matmul", a, 2);
    require_rank("matmul", b, 2);
    if (a.dim(1) != b.dim(0)) {
        throw DimensionError("matmul: inner dimensions differ, " + to_string(a.shape()) + " · " + to_string(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<T> out(m * n);
    kernels::gemm_nn<T>(a.data(), b.data(), out, m, k, n);
    auto ia = a.impl(), ib = b.impl();
    return make_result<T>("matmul", {m, n}, std::move(out), {ia, ib}, [ia, ib, m, k, n](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) {
            kernels::gemm_nt<T>(g, ib->data, ga, m, n, k, kernels::Accumulate::Add);
        });
        accumulate<T>(ib, [&](auto& gb) {
            kernels::gemm_tn<T>(ia->data, g, gb, k, m, n, kernels::Accumulate::Add);
        });
    });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
    T total = 0;
    for (T v : a.data()) total += v;
    auto ia = a.impl();
    return make_result<T>("sum", {1}, {total}, {ia}, [ia](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) { for (auto& v : ga) v += g[0]; });
    });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
    T total = 0;
    for (T v : a.data()) total += v;
    const T count = static_cast<T>(a.numel());
    auto ia = a.impl();
    return make_result<T>("mean", {1}, {total / count}, {ia}, [ia, count](std::span<const T> g) {
        const T share = g[0] / count;
        accumulate<T>(ia, [&](auto& ga) { for (auto& v : ga) v += share; });
    });
}

template <typename T>
Tensor<T> row_dot(const Tensor<T>& a, const Tensor<T>& b) {
    require_rank("row_dot", a, 2);
    require_same_shape("row_dot", a, b);
    const std::size_t rows = a.dim(0), cols = a.dim(1);
    std::vector<T> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        T s = 0;
        for (std::size_t c = 0; c < cols; ++c) s += a.data()[r * cols + c] * b.data()[r * cols + c];
        out[r] = s;
    }
    auto ia = a.impl(), ib = b.impl();
    return make_result<T>("row_dot", {rows}, std::move(out), {ia, ib}, [ia, ib, rows, cols](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += g[r] * ib->data[r * cols + c];
        });
        accumulate<T>(ib, [&](auto& gb) {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c) gb[r * cols + c] += g[r] * ia->data[r * cols + c];
        });
    });
}

template <typename T>
Tensor<T> l2_normalize(const Tensor<T>& v, T eps) {
    require_rank("l2_normalize", v, 2);
    const std::size_t rows = v.dim(0), cols = v.dim(1);
    std::vector<T> out(v.numel());
    std::vector<T> denom(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        T sq = 0;
        for (std::size_t c = 0; c < cols; ++c) sq += v.data()[r * cols + c] * v.data()[r * cols + c];
        denom[r] = std::max(std::sqrt(sq), eps);
        for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = v.data()[r * cols + c] / denom[r];
    }
    auto iv = v.impl();
    std::vector<T> saved = out;
    return make_result<T>("l2_normalize", v.shape(), std::move(out), {iv},
                          [iv, rows, cols, eps, denom = std::move(denom), y = std::move(saved)](std::span<const T> g) {
                              accumulate<T>(iv, [&](auto& gv) {
                                  for (std::size_t r = 0; r < rows; ++r) {
                                      const T* yr = y.data() + r * cols;
                                      const T* gr = g.data() + r * cols;
                                      if (denom[r] > eps) {
                                          T proj = 0;
                                          for (std::size_t c = 0; c < cols; ++c) proj += yr[c] * gr[c];
                                          for (std::size_t c = 0; c < cols; ++c)
                                              gv[r * cols + c] += (gr[c] - yr[c] * proj) / denom[r];
                                      } else {
                                          // Clamped denominator is constant.
                                          for (std::size_t c = 0; c < cols; ++c) gv[r * cols + c] += gr[c] / eps;
                                      }
                                  }
                              });
                          });
}

template <typename T>
Tensor<T> clamp_passthrough(const Tensor<T>& a, T lo, T hi) {
    std::vector<T> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(a.data()[i], lo, hi);
    auto ia = a.impl();
    return make_result<T>("clamp_passthrough", a.shape(), std::move(out), {ia}, [ia](std::span<const T> g) {
        accumulate<T>(ia, [&](auto& ga) { for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i]; });
    });
}

template <typename T>
Tensor<T> detach(const Tensor<T>& v) {
    return Tensor<T>::from(v.shape(), std::vector<T>(v.data().begin(), v.data().end()), false);
}

template <typename T>
Tensor<T> select_rows(const Tensor<T>& a, const Tensor<T>& b, std::span<const std::uint8_t> take_a) {
    require_rank("select_rows", a, 2);
    require_same_shape("select_rows", a, b);
    const std::size_t rows = a.dim(0), cols = a.dim(1);
    if (take_a.size() != rows) {
        throw DimensionError("select_rows: mask has " + std::to_string(take_a.size()) + " entries for " +
                             std::to_string(rows) + " rows");
    }
    std::vector<T> out(a.numel());
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& src = take_a[r] ? a.data() : b.data();
        std::copy_n(src.begin() + r * cols, cols, out.begin() + r * cols);
    }
    auto ia = a.impl(), ib = b.impl();
    std::vector<std::uint8_t> mask(take_a.begin(), take_a.end());
    return make_result<T>("select_rows", a.shape(), std::move(out), {ia, ib},
                          [ia, ib, rows, cols, mask = std::move(mask)](std::span<const T> g) {
                              for (std::size_t r = 0; r < rows; ++r) {
                                  const auto& target = mask[r] ? ia : ib;
                                  accumulate<T>(target, [&](auto& gt) {
                                      for (std::size_t c = 0; c < cols; ++c) gt[r * cols + c] += g[r * cols + c];
                                  });
                              }
                          });
}

template <typename T>
Tensor<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode, const BatchNormOptions& options) {
    if (x.rank() != 2 && x.rank() != 4) {
        throw DimensionError("batchnorm: expected [B×D] or [B×C×H×W], got " + to_string(x.shape()));
    }
    const std::size_t batch = x.dim(0), channels = x.dim(1);
    const std::size_t inner = x.numel() / (batch * channels);
    for (const Tensor<T>* p : std::initializer_list<const Tensor<T>*>{&gamma, &beta, &running_mean, &running_var}) {
        if (p->rank() != 1 || p->dim(0) != channels) {
            throw DimensionError("batchnorm: per-channel tensor " + to_string(p->shape()) + " does not match input " +
                                 to_string(x.shape()));
        }
    }
    if (mode != Mode::Eval && batch < 2) {
        throw DimensionError("batchnorm: train mode needs a batch of at least 2, got " + std::to_string(batch));
    }
    const std::size_t count = batch * inner;
    const T eps = static_cast<T>(options.eps);
    const auto at = [channels, inner](std::size_t b, std::size_t c, std::size_t i) {
        return (b * channels + c) * inner + i;
    };

    std::vector<T> xhat(x.numel());
    std::vector<T> inv_std(channels);
    std::vector<T> out(x.numel());
    const auto xs = x.data();
    for (std::size_t c = 0; c < channels; ++c) {
        T mu, var;
        if (mode != Mode::Eval) {
            T s = 0;
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) s += xs[at(b, c, i)];
            mu = s / static_cast<T>(count);
            T sq = 0;
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) {
                    const T d = xs[at(b, c, i)] - mu;
                    sq += d * d;
                }
            var = sq / static_cast<T>(count);
            if (mode == Mode::Train) {
                const T m = static_cast<T>(options.momentum);
                const T unbiased = sq / static_cast<T>(count - 1);
                auto rm = running_mean.mutable_data();
                auto rv = running_var.mutable_data();
                rm[c] = (T(1) - m) * rm[c] + m * mu;
                rv[c] = (T(1) - m) * rv[c] + m * unbiased;
            }
        } else {
            mu = running_mean.data()[c];
            var = running_var.data()[c];
        }
        inv_std[c] = T(1) / std::sqrt(var + eps);
        const T g = gamma.data()[c], bt = beta.data()[c];
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < inner; ++i) {
                const std::size_t idx = at(b, c, i);
                xhat[idx] = (xs[idx] - mu) * inv_std[c];
                out[idx] = g * xhat[idx] + bt;
            }
    }

    auto ix = x.impl(), ig = gamma.impl(), ib = beta.impl();
    const bool train = mode != Mode::Eval;
    return make_result<T>(
        "batchnorm", x.shape(), std::move(out), {ix, ig, ib},
        [ix, ig, ib, train, batch, channels, inner, count, at, xhat = std::move(xhat),
         inv_std = std::move(inv_std)](std::span<const T> g) {
            for (std::size_t c = 0; c < channels; ++c) {
                T sum_g = 0, sum_gx = 0;
                for (std::size_t b = 0; b < batch; ++b)
                    for (std::size_t i = 0; i < inner; ++i) {
                        const std::size_t idx = at(b, c, i);
                        sum_g += g[idx];
                        sum_gx += g[idx] * xhat[idx];
                    }
                accumulate<T>(ig, [&](auto& gg) { gg[c] += sum_gx; });
                accumulate<T>(ib, [&](auto& gb) { gb[c] += sum_g; });
                const T gam = ig->data[c];
                accumulate<T>(ix, [&](auto& gx) {
                    const T n = static_cast<T>(count);
                    for (std::size_t b = 0; b < batch; ++b)
                        for (std::size_t i = 0; i < inner; ++i) {
                            const std::size_t idx = at(b, c, i);
                            if (train) {
                                gx[idx] += gam * inv_std[c] * (n * g[idx] - sum_g - xhat[idx] * sum_gx) / n;
                            } else {
                                gx[idx] += gam * inv_std[c] * g[idx];
                            }
                        }
                });
            }
        });
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernels_t, std::size_t stride, std::size_t padding) {
    require_rank("conv2d", input, 4);
    require_rank("conv2d", kernels_t, 4);
    kernels::ConvGeometry geo;
    geo.batch = input.dim(0);
    geo.channels = input.dim(1);
    geo.height = input.dim(2);
    geo.width = input.dim(3);
    geo.kernel_h = kernels_t.dim(2);
    geo.kernel_w = kernels_t.dim(3);
    geo.stride = stride;
    geo.padding = padding;
    if (kernels_t.dim(1) != geo.channels || !geo.valid()) {
        throw DimensionError("conv2d: input " + to_string(input.shape()) + " incompatible with kernels " +
                             to_string(kernels_t.shape()) + " at stride " + std::to_string(stride) + ", padding " +
                             std::to_string(padding));
    }
    const std::size_t out_ch = kernels_t.dim(0);
    const std::size_t patch = geo.patch_size(), ncols = geo.columns(), pixels = geo.out_pixels();

    std::vector<T> cols(patch * ncols);
    kernels::im2col<T>(input.data(), geo, cols);
    std::vector<T> flat(out_ch * ncols);
    kernels::gemm_nn<T>(kernels_t.data(), cols, flat, out_ch, patch, ncols);
    // [K × B·P] → [B × K × P]
    std::vector<T> out(flat.size());
    for (std::size_t k = 0; k < out_ch; ++k)
        for (std::size_t b = 0; b < geo.batch; ++b)
            std::copy_n(flat.begin() + k * ncols + b * pixels, pixels, out.begin() + (b * out_ch + k) * pixels);

    auto ii = input.impl(), ik = kernels_t.impl();
    return make_result<T>(
        "conv2d", {geo.batch, out_ch, geo.out_height(), geo.out_width()}, std::move(out), {ii, ik},
        [ii, ik, geo, out_ch, patch, ncols, pixels, cols = std::move(cols)](std::span<const T> g) {
            std::vector<T> gflat(out_ch * ncols);
            for (std::size_t k = 0; k < out_ch; ++k)
                for (std::size_t b = 0; b < geo.batch; ++b)
                    std::copy_n(g.begin() + (b * out_ch + k) * pixels, pixels, gflat.begin() + k * ncols + b * pixels);
            accumulate<T>(ik, [&](auto& gk) {
                kernels::gemm_nt<T>(gflat, cols, gk, out_ch, ncols, patch, kernels::Accumulate::Add);
            });
            accumulate<T>(ii, [&](auto& gi) {
                std::vector<T> gcols(patch * ncols);
                kernels::gemm_tn<T>(ik->data, gflat, gcols, patch, out_ch, ncols);
                kernels::col2im_add<T>(gcols, geo, gi);
            });
        });
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input) {
    require_rank("global_avg_pool", input, 4);
    const std::size_t rows = input.dim(0) * input.dim(1);
    const std::size_t plane = input.dim(2) * input.dim(3);
    std::vector<T> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        T s = 0;
        for (std::size_t i = 0; i < plane; ++i) s += input.data()[r * plane + i];
        out[r] = s / static_cast<T>(plane);
    }
    auto ii = input.impl();
    return make_result<T>("global_avg_pool", {input.dim(0), input.dim(1)}, std::move(out), {ii},
                          [ii, rows, plane](std::span<const T> g) {
                              accumulate<T>(ii, [&](auto& gi) {
                                  for (std::size_t r = 0; r < rows; ++r) {
                                      const T share = g[r] / static_cast<T>(plane);
                                      for (std::size_t i = 0; i < plane; ++i) gi[r * plane + i] += share;
                                  }
                              });
                          });
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& input) {
    const std::size_t batch = input.dim(0);
    std::vector<T> out(input.data().begin(), input.data().end());
    auto ii = input.impl();
    return make_result<T>("flatten", {batch, input.numel() / batch}, std::move(out), {ii}, [ii](std::span<const T> g) {
        accumulate<T>(ii, [&](auto& gi) { for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i]; });
    });
}

template <typename T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::size_t> labels) {
    require_rank("softmax_cross_entropy", logits, 2);
    const std::size_t rows = logits.dim(0), classes = logits.dim(1);
    if (labels.size() != rows) {
        throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(rows) + " rows");
    }
    std::vector<T> probs(logits.numel());
    T loss = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (labels[r] >= classes) throw DimensionError("softmax_cross_entropy: label out of range");
        const T* z = logits.data().data() + r * classes;
        const T top = *std::max_element(z, z + classes);
        T denom = 0;
        for (std::size_t c = 0; c < classes; ++c) {
            probs[r * classes + c] = std::exp(z[c] - top);
            denom += probs[r * classes + c];
        }
        for (std::size_t c = 0; c < classes; ++c) probs[r * classes + c] /= denom;
        loss += -(z[labels[r]] - top - std::log(denom));
    }
    loss /= static_cast<T>(rows);
    auto il = logits.impl();
    std::vector<std::size_t> targets(labels.begin(), labels.end());
    return make_result<T>("softmax_cross_entropy", {1}, {loss}, {il},
                          [il, rows, classes, probs = std::move(probs), targets = std::move(targets)](std::span<const T> g) {
                              accumulate<T>(il, [&](auto& gl) {
                                  const T share = g[0] / static_cast<T>(rows);
                                  for (std::size_t r = 0; r < rows; ++r)
                                      for (std::size_t c = 0; c < classes; ++c) {
                                          const T onehot = c == targets[r] ? T(1) : T(0);
                                          gl[r * classes + c] += share * (probs[r * classes + c] - onehot);
                                      }
                              });
                          });
}

#define MIXSIAM_INSTANTIATE_OPS(T)                                                                       \
    template Tensor<T> elementwise<T>(Elementwise, const Tensor<T>&, const Tensor<T>&);                   \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                        \
    template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                                        \
    template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                        \
    template Tensor<T> maximum<T>(const Tensor<T>&, const Tensor<T>&);                                    \
    template Tensor<T> scale<T>(const Tensor<T>&, T);                                                     \
    template Tensor<T> relu<T>(const Tensor<T>&);                                                         \
    template Tensor<T> add_bias<T>(const Tensor<T>&, const Tensor<T>&);                                   \
    template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                                     \
    template Tensor<T> sum<T>(const Tensor<T>&);                                                          \
    template Tensor<T> mean<T>(const Tensor<T>&);                                                         \
    template Tensor<T> row_dot<T>(const Tensor<T>&, const Tensor<T>&);                                    \
    template Tensor<T> l2_normalize<T>(const Tensor<T>&, T);                                              \
    template Tensor<T> clamp_passthrough<T>(const Tensor<T>&, T, T);                                      \
    template Tensor<T> detach<T>(const Tensor<T>&);                                                       \
    template Tensor<T> select_rows<T>(const Tensor<T>&, const Tensor<T>&, std::span<const std::uint8_t>); \
    template Tensor<T> batchnorm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,     \
                                    Tensor<T>&, Mode, const BatchNormOptions&);                           \
    template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, std::size_t, std::size_t);           \
    template Tensor<T> global_avg_pool<T>(const Tensor<T>&);                                              \
    template Tensor<T> flatten<T>(const Tensor<T>&);                                                      \
    template Tensor<T> softmax_cross_entropy<T>(const Tensor<T>&, std::span<const std::size_t>);

MIXSIAM_INSTANTIATE_OPS(float)
MIXSIAM_INSTANTIATE_OPS(double)

}  // namespace mixsiam::ad
