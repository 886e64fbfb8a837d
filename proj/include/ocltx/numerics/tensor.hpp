#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ocltx::num {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

// Dense row-major array with optional reverse-mode gradient tracking.
//
// A Tensor is a cheap shared handle: copies alias the same storage. Values
// produced by an operation are not modified afterwards; only leaves (model
// parameters) are updated in place by the optimizer.
template <class T>
class Tensor {
public:
    struct Node {
        Shape shape;
        std::vector<T> value;
        std::vector<T> grad;  // empty until a gradient is accumulated
        bool requires_grad = false;
        std::vector<std::shared_ptr<Node>> parents;
        // Propagates `self.grad` into the parents' grads.
        std::function<void(Node& self)> backward;

        std::vector<T>& ensure_grad();
    };

    using NodePtr = std::shared_ptr<Node>;
    using BackwardFn = std::function<void(Node& self)>;

    Tensor() = default;
    Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor filled(Shape shape, T value, bool requires_grad = false);
    static Tensor scalar(T value);

    // Result of an operation. The node tracks gradients iff any parent does;
    // `backward` is dropped otherwise.
    static Tensor from_op(Shape shape, std::vector<T> values, std::vector<Tensor> parents, BackwardFn backward);

    bool defined() const noexcept { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const { return node_ ? node_->value.size() : 0; }
    std::size_t rows() const;  // extent of axis 0 of a rank-2 tensor
    std::size_t cols() const;  // extent of axis 1 of a rank-2 tensor

    std::span<const T> values() const;
    // In-place access. Only meaningful for leaves; mutating an intermediate
    // invalidates the recorded graph.
    std::span<T> mutable_values();
    T item() const;
    T at(std::size_t row, std::size_t col) const;

    bool requires_grad() const noexcept { return node_ && node_->requires_grad; }
    void set_requires_grad(bool on);
    bool has_grad() const noexcept { return node_ && !node_->grad.empty(); }
    // Zeros when no gradient has been accumulated yet.
    std::vector<T> grad_or_zeros() const;
    std::span<const T> grad() const;
    std::span<T> mutable_grad();
    void zero_grad();

    // Reverse-mode sweep from this scalar; gradients accumulate into every
    // tracked ancestor.
    void backward() const;

    // Same values, no history.
    Tensor detach() const;
    Tensor clone() const;

    Node* node() const noexcept { return node_.get(); }
    const NodePtr& node_ptr() const noexcept { return node_; }

private:
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}
    NodePtr node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace ocltx::num
