#include "ocltx/numerics/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "ocltx/errors.hpp"

namespace ocltx::num {

std::size_t numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

template <class T>
std::vector<T>& Tensor<T>::Node::ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad;
}

template <class T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad) {
    if (numel(shape) != values.size()) {
        throw DimensionError("tensor shape " + shape_str(shape) + " does not match " +
                             std::to_string(values.size()) + " values");
    }
    node_ = std::make_shared<Node>();
    node_->shape = std::move(shape);
    node_->value = std::move(values);
    node_->requires_grad = requires_grad;
}

template <class T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
    auto n = numel(shape);
    return Tensor(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
}

template <class T>
Tensor<T> Tensor<T>::filled(Shape shape, T value, bool requires_grad) {
    auto n = numel(shape);
    return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <class T>
Tensor<T> Tensor<T>::scalar(T value) {
    return Tensor(Shape{}, std::vector<T>{value});
}

template <class T>
Tensor<T> Tensor<T>::from_op(Shape shape, std::vector<T> values, std::vector<Tensor> parents, BackwardFn backward) {
    Tensor out(std::move(shape), std::move(values));
    bool tracked = std::any_of(parents.begin(), parents.end(), [](const Tensor& p) { return p.requires_grad(); });
    if (tracked) {
        out.node_->requires_grad = true;
        out.node_->parents.reserve(parents.size());
        for (auto& p : parents) {
            if (p.requires_grad()) out.node_->parents.push_back(p.node_);
        }
        out.node_->backward = std::move(backward);
    }
    return out;
}

template <class T>
const Shape& Tensor<T>::shape() const {
    if (!node_) throw StateError("use of an undefined tensor");
    return node_->shape;
}

template <class T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
    const auto& s = shape();
    if (axis >= s.size()) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " + shape_str(s));
    }
    return s[axis];
}

template <class T>
std::size_t Tensor<T>::rows() const {
    if (rank() != 2) throw DimensionError("expected a matrix, got shape " + shape_str(shape()));
    return shape()[0];
}

template <class T>
std::size_t Tensor<T>::cols() const {
    if (rank() != 2) throw DimensionError("expected a matrix, got shape " + shape_str(shape()));
    return shape()[1];
}

template <class T>
std::span<const T> Tensor<T>::values() const {
    if (!node_) return {};
    return node_->value;
}

template <class T>
std::span<T> Tensor<T>::mutable_values() {
    if (!node_) return {};
    return node_->value;
}

template <class T>
T Tensor<T>::item() const {
    if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
    return node_->value[0];
}

template <class T>
T Tensor<T>::at(std::size_t row, std::size_t col) const {
    return node_->value[row * cols() + col];
}

template <class T>
void Tensor<T>::set_requires_grad(bool on) {
    if (!node_) throw StateError("use of an undefined tensor");
    node_->requires_grad = on;
}

template <class T>
std::vector<T> Tensor<T>::grad_or_zeros() const {
    if (has_grad()) return node_->grad;
    return std::vector<T>(size(), T(0));
}

template <class T>
std::span<const T> Tensor<T>::grad() const {
    if (!node_) return {};
    return node_->grad;
}

template <class T>
std::span<T> Tensor<T>::mutable_grad() {
    if (!node_) return {};
    return node_->ensure_grad();
}

template <class T>
void Tensor<T>::zero_grad() {
    if (node_ && !node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), T(0));
}

template <class T>
void Tensor<T>::backward() const {
    if (size() != 1) throw DimensionError("backward() needs a scalar, got shape " + shape_str(shape()));
    if (!node_->requires_grad) return;

    // Iterative post-order DFS gives a topological order with parents first.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->parents.size()) {
            Node* p = n->parents[next++].get();
            if (seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    node_->ensure_grad()[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward && !n->grad.empty()) n->backward(*n);
    }
}

template <class T>
Tensor<T> Tensor<T>::detach() const {
    if (!node_) return {};
    return Tensor(node_->shape, node_->value);
}

template <class T>
Tensor<T> Tensor<T>::clone() const {
    if (!node_) return {};
    return Tensor(node_->shape, node_->value, node_->requires_grad);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace ocltx::num
