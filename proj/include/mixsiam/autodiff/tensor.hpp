#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mixsiam::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

template <typename T>
struct Node;

namespace detail {

template <typename T>
struct TensorImpl {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until something flows into it
    bool requires_grad = false;
    std::shared_ptr<Node<T>> grad_fn;

    std::vector<T>& grad_buffer() {
        if (grad.empty()) grad.assign(data.size(), T(0));
        return grad;
    }
};

}  // namespace detail

// One recorded operation. `inputs` keeps upstream tensors alive for the
// backward pass; the output is held weakly so a graph never owns itself.
template <typename T>
struct Node {
    std::uint64_t sequence = 0;
    const char* op = "";
    std::vector<std::shared_ptr<detail::TensorImpl<T>>> inputs;
    std::weak_ptr<detail::TensorImpl<T>> output;
    // Receives the output gradient, accumulates into inputs' grad buffers.
    std::function<void(std::span<const T>)> backward;
};

// Dense row-major tensor with shared ownership. Copies alias the same
// storage, which is how parameters are shared between siamese branches.
template <typename T>
class Tensor {
public:
    using Impl = detail::TensorImpl<T>;

    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, T value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
    static Tensor scalar(T value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
    std::size_t numel() const { return impl_->data.size(); }

    std::span<const T> data() const { return impl_->data; }
    // Direct writes bypass the graph; meant for optimizer updates on leaves.
    std::span<T> mutable_data() { return impl_->data; }
    T item() const;
    T at(std::size_t flat_index) const { return impl_->data.at(flat_index); }

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool on) { impl_->requires_grad = on; }
    bool is_leaf() const { return impl_->grad_fn == nullptr; }

    bool has_grad() const { return !impl_->grad.empty(); }
    // Empty span when no gradient has been accumulated.
    std::span<const T> grad() const { return impl_->grad; }
    std::span<T> mutable_grad() { return impl_->grad_buffer(); }
    void zero_grad() { impl_->grad.clear(); }

    // Reverse-mode pass from a one-element tensor. Leaf gradients accumulate
    // across calls; intermediate gradients are recomputed from scratch.
    void backward() const;

    bool shares_storage_with(const Tensor& other) const { return impl_ == other.impl_; }

    // Deep copy of values only, detached from any graph.
    Tensor clone() const;

    const std::shared_ptr<Impl>& impl() const { return impl_; }
    explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<Impl> impl_;
};

// Creates an op output. When any input requires grad the output records
// a node whose closure is `backward`.
template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> values,
                      std::vector<std::shared_ptr<detail::TensorImpl<T>>> inputs,
                      std::function<void(std::span<const T>)> backward);

// Number of nodes reachable from `root`, each counted once.
template <typename T>
std::size_t graph_size(const Tensor<T>& root);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace mixsiam::ad
