#include "mixsiam/autodiff/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <unordered_set>

#include "mixsiam/core/error.hpp"

namespace mixsiam::ad {

namespace {
std::atomic<std::uint64_t> g_sequence{0};

// Nodes reachable from root, sorted so that every node precedes the nodes
// that produced its inputs (descending recording order).
template <typename T>
std::vector<Node<T>*> collect(const std::shared_ptr<Node<T>>& root) {
    std::vector<Node<T>*> order;
    if (!root) return order;
    std::unordered_set<Node<T>*> seen;
    std::vector<Node<T>*> stack{root.get()};
    seen.insert(root.get());
    while (!stack.empty()) {
        Node<T>* node = stack.back();
        stack.pop_back();
        order.push_back(node);
        for (const auto& input : node->inputs) {
            Node<T>* parent = input->grad_fn.get();
            if (parent && seen.insert(parent).second) stack.push_back(parent);
        }
    }
    std::sort(order.begin(), order.end(),
              [](const Node<T>* a, const Node<T>* b) { return a->sequence > b->sequence; });
    return order;
}
}  // namespace

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string to_string(const Shape& shape) {
    std::ostringstream out;
    out << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
    out << ']';
    return out.str();
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
    return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
    const std::size_t n = ad::numel(shape);
    return from(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
    for (std::size_t d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + ad::to_string(shape));
    }
    if (ad::numel(shape) != values.size()) {
        throw DimensionError("shape " + ad::to_string(shape) + " needs " + std::to_string(ad::numel(shape)) +
                             " values, got " + std::to_string(values.size()));
    }
    auto impl = std::make_shared<Impl>();
    impl->shape = std::move(shape);
    impl->data = std::move(values);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
    return from({1}, {value}, requires_grad);
}

template <typename T>
T Tensor<T>::item() const {
    if (numel() != 1) throw DimensionError("item() on tensor of shape " + ad::to_string(shape()));
    return impl_->data[0];
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
    return from(impl_->shape, impl_->data, false);
}

template <typename T>
void Tensor<T>::backward() const {
    if (numel() != 1) {
        throw DimensionError("backward() needs a scalar loss, got shape " + ad::to_string(shape()));
    }
    const auto order = collect(impl_->grad_fn);
    for (Node<T>* node : order) {
        if (auto out = node->output.lock()) out->grad.clear();
    }
    if (order.empty()) {
        // Leaf loss: d(loss)/d(loss) accumulates like any other leaf.
        if (impl_->requires_grad) impl_->grad_buffer()[0] += T(1);
        return;
    }
    impl_->grad.assign(1, T(1));
    for (Node<T>* node : order) {
        auto out = node->output.lock();
        if (!out || out->grad.empty()) continue;
        node->backward(out->grad);
    }
}

template <typename T>
Tensor<T> make_result(const char* op, Shape shape, std::vector<T> values,
                      std::vector<std::shared_ptr<detail::TensorImpl<T>>> inputs,
                      std::function<void(std::span<const T>)> backward) {
    Tensor<T> out = Tensor<T>::from(std::move(shape), std::move(values));
    const bool tracked = std::any_of(inputs.begin(), inputs.end(),
                                     [](const auto& in) { return in->requires_grad; });
    if (!tracked) return out;
    auto node = std::make_shared<Node<T>>();
    node->sequence = g_sequence.fetch_add(1, std::memory_order_relaxed);
    node->op = op;
    node->inputs = std::move(inputs);
    node->output = out.impl();
    node->backward = std::move(backward);
    out.impl()->requires_grad = true;
    out.impl()->grad_fn = std::move(node);
    return out;
}

template <typename T>
std::size_t graph_size(const Tensor<T>& root) {
    return collect(root.impl()->grad_fn).size();
}

template class Tensor<float>;
template class Tensor<double>;

template Tensor<float> make_result<float>(const char*, Shape, std::vector<float>,
                                          std::vector<std::shared_ptr<detail::TensorImpl<float>>>,
                                          std::function<void(std::span<const float>)>);
template Tensor<double> make_result<double>(const char*, Shape, std::vector<double>,
                                            std::vector<std::shared_ptr<detail::TensorImpl<double>>>,
                                            std::function<void(std::span<const double>)>);
template std::size_t graph_size<float>(const Tensor<float>&);
template std::size_t graph_size<double>(const Tensor<double>&);

}  // namespace mixsiam::ad
