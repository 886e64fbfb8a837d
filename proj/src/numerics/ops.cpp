#include "ocltx/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ocltx/errors.hpp"
#include "ocltx/numerics/mac_counter.hpp"

namespace ocltx::num {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapC = Eigen::Map<const RowMat<T>>;
template <class T>
using Map = Eigen::Map<RowMat<T>>;

template <class T>
std::vector<T>& grad_of(const typename Tensor<T>::NodePtr& n) {
    return n->ensure_grad();
}

// Last-axis view: [outer, inner].
template <class T>
std::pair<std::size_t, std::size_t> as_matrix(const Tensor<T>& x) {
    const auto& s = x.shape();
    if (s.empty()) return {1, 1};
    std::size_t inner = s.back();
    return {inner == 0 ? 0 : x.size() / inner, inner};
}

void require_matrix(const Shape& s, const char* op) {
    if (s.size() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(s));
}

}  // namespace

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    require_matrix(a.shape(), "matmul");
    require_matrix(b.shape(), "matmul");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw DimensionError("matmul: inner extents differ for " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    }
    std::vector<T> out(m * n);
    Map<T>(out.data(), m, n).noalias() = MapC<T>(a.values().data(), m, k) * MapC<T>(b.values().data(), k, n);
    mac_counter().forward += m * k * n;

    auto an = a.node_ptr(), bn = b.node_ptr();
    return Tensor<T>::from_op({m, n}, std::move(out), {a, b}, [an, bn, m, k, n](auto& self) {
        MapC<T> g(self.grad.data(), m, n);
        if (an->requires_grad) {
            Map<T>(grad_of<T>(an).data(), m, k).noalias() += g * MapC<T>(bn->value.data(), k, n).transpose();
            mac_counter().backward += m * k * n;
        }
        if (bn->requires_grad) {
            Map<T>(grad_of<T>(bn).data(), k, n).noalias() += MapC<T>(an->value.data(), m, k).transpose() * g;
            mac_counter().backward += m * k * n;
        }
    });
}

template <class T>
Tensor<T> transpose(const Tensor<T>& a) {
    require_matrix(a.shape(), "transpose");
    const std::size_t m = a.rows(), n = a.cols();
    std::vector<T> out(m * n);
    Map<T>(out.data(), n, m) = MapC<T>(a.values().data(), m, n).transpose();
    auto an = a.node_ptr();
    return Tensor<T>::from_op({n, m}, std::move(out), {a}, [an, m, n](auto& self) {
        Map<T>(grad_of<T>(an).data(), m, n) += MapC<T>(self.grad.data(), n, m).transpose();
    });
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError("add: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) + " differ");
    }
    std::vector<T> out(a.values().begin(), a.values().end());
    auto bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
    auto an = a.node_ptr(), bn = b.node_ptr();
    return Tensor<T>::from_op(a.shape(), std::move(out), {a, b}, [an, bn](auto& self) {
        for (auto* n : {an.get(), bn.get()}) {
            if (!n->requires_grad) continue;
            auto& g = n->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError("mul: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()) + " differ");
    }
    std::vector<T> out(a.size());
    auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
    auto an = a.node_ptr(), bn = b.node_ptr();
    return Tensor<T>::from_op(a.shape(), std::move(out), {a, b}, [an, bn](auto& self) {
        if (an->requires_grad) {
            auto& g = an->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            auto& g = bn->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * an->value[i];
        }
    });
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
    std::vector<T> out(a.values().begin(), a.values().end());
    for (auto& v : out) v *= factor;
    auto an = a.node_ptr();
    return Tensor<T>::from_op(a.shape(), std::move(out), {a}, [an, factor](auto& self) {
        auto& g = an->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
    });
}

template <class T>
Tensor<T> gelu(const Tensor<T>& x) {
    constexpr T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
    constexpr T inv_sqrt2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
    std::vector<T> out(x.size());
    auto xv = x.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = T(0.5) * xv[i] * (T(1) + std::erf(xv[i] * inv_sqrt2));
    auto xn = x.node_ptr();
    return Tensor<T>::from_op(x.shape(), std::move(out), {x}, [xn](auto& self) {
        auto& g = xn->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            T v = xn->value[i];
            T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
            T pdf = inv_sqrt2pi * std::exp(T(-0.5) * v * v);
            g[i] += self.grad[i] * (cdf + v * pdf);
        }
    });
}

template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& scale, const Tensor<T>& offset, T eps) {
    auto [n, d] = as_matrix(x);
    if (scale.size() != d || offset.size() != d) {
        throw DimensionError("layer_norm: last extent of " + shape_str(x.shape()) + " does not match scale " +
                             shape_str(scale.shape()) + " / offset " + shape_str(offset.shape()));
    }
    auto xv = x.values(), sv = scale.values(), ov = offset.values();
    std::vector<T> out(x.size());
    std::vector<T> xhat(x.size());
    std::vector<T> inv_std(n);
    for (std::size_t r = 0; r < n; ++r) {
        const T* row = xv.data() + r * d;
        T mu = 0;
        for (std::size_t j = 0; j < d; ++j) mu += row[j];
        mu /= T(d);
        T var = 0;
        for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= T(d);
        T is = T(1) / std::sqrt(var + eps);
        inv_std[r] = is;
        for (std::size_t j = 0; j < d; ++j) {
            T h = (row[j] - mu) * is;
            xhat[r * d + j] = h;
            out[r * d + j] = sv[j] * h + ov[j];
        }
    }
    auto xn = x.node_ptr(), sn = scale.node_ptr(), on = offset.node_ptr();
    return Tensor<T>::from_op(
        x.shape(), std::move(out), {x, scale, offset},
        [xn, sn, on, n, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](auto& self) {
            const auto& g = self.grad;
            if (sn->requires_grad) {
                auto& gs = sn->ensure_grad();
                for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t j = 0; j < d; ++j) gs[j] += g[r * d + j] * xhat[r * d + j];
            }
            if (on->requires_grad) {
                auto& go = on->ensure_grad();
                for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t j = 0; j < d; ++j) go[j] += g[r * d + j];
            }
            if (xn->requires_grad) {
                auto& gx = xn->ensure_grad();
                std::vector<T> dh(d);
                for (std::size_t r = 0; r < n; ++r) {
                    T mean_dh = 0, mean_dh_h = 0;
                    for (std::size_t j = 0; j < d; ++j) {
                        dh[j] = g[r * d + j] * sn->value[j];
                        mean_dh += dh[j];
                        mean_dh_h += dh[j] * xhat[r * d + j];
                    }
                    mean_dh /= T(d);
                    mean_dh_h /= T(d);
                    for (std::size_t j = 0; j < d; ++j) {
                        gx[r * d + j] += inv_std[r] * (dh[j] - mean_dh - xhat[r * d + j] * mean_dh_h);
                    }
                }
            }
        });
}

template <class T>
Tensor<T> masked_softmax(const Tensor<T>& logits, const Mask& mask) {
    require_matrix(logits.shape(), "masked_softmax");
    const std::size_t n = logits.rows(), m = logits.cols();
    if (mask.rows != n || mask.cols != m) {
        throw DimensionError("masked_softmax: mask [" + std::to_string(mask.rows) + "," +
                             std::to_string(mask.cols) + "] does not match logits " + shape_str(logits.shape()));
    }
    auto lv = logits.values();
    std::vector<T> out(n * m, T(0));
    for (std::size_t r = 0; r < n; ++r) {
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t c = 0; c < m; ++c)
            if (mask.at(r, c)) mx = std::max(mx, lv[r * m + c]);
        if (mx == -std::numeric_limits<T>::infinity()) continue;  // fully masked row
        T z = 0;
        for (std::size_t c = 0; c < m; ++c) {
            if (!mask.at(r, c)) continue;
            T e = std::exp(lv[r * m + c] - mx);
            out[r * m + c] = e;
            z += e;
        }
        for (std::size_t c = 0; c < m; ++c) out[r * m + c] /= z;
    }
    auto ln = logits.node_ptr();
    auto probs = out;
    return Tensor<T>::from_op({n, m}, std::move(out), {logits}, [ln, n, m, probs = std::move(probs)](auto& self) {
        auto& g = ln->ensure_grad();
        for (std::size_t r = 0; r < n; ++r) {
            T dot = 0;
            for (std::size_t c = 0; c < m; ++c) dot += probs[r * m + c] * self.grad[r * m + c];
            for (std::size_t c = 0; c < m; ++c) g[r * m + c] += probs[r * m + c] * (self.grad[r * m + c] - dot);
        }
    });
}

template <class T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
    require_matrix(logits.shape(), "cross_entropy");
    const std::size_t n = logits.rows(), k = logits.cols();
    if (labels.size() != n) {
        throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                             shape_str(logits.shape()));
    }
    auto lv = logits.values();
    std::vector<T> out(n);
    std::vector<T> probs(n * k);
    for (std::size_t r = 0; r < n; ++r) {
        if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= k) {
            throw IndexError("cross_entropy: label " + std::to_string(labels[r]) + " outside [0, " +
                             std::to_string(k) + ")");
        }
        const T* row = lv.data() + r * k;
        T mx = *std::max_element(row, row + k);
        T z = 0;
        for (std::size_t c = 0; c < k; ++c) z += std::exp(row[c] - mx);
        T lse = mx + std::log(z);
        out[r] = lse - row[labels[r]];
        for (std::size_t c = 0; c < k; ++c) probs[r * k + c] = std::exp(row[c] - lse);
    }
    auto ln = logits.node_ptr();
    std::vector<int> lab(labels.begin(), labels.end());
    return Tensor<T>::from_op({n}, std::move(out), {logits},
                              [ln, n, k, probs = std::move(probs), lab = std::move(lab)](auto& self) {
                                  auto& g = ln->ensure_grad();
                                  for (std::size_t r = 0; r < n; ++r) {
                                      T gr = self.grad[r];
                                      for (std::size_t c = 0; c < k; ++c) g[r * k + c] += gr * probs[r * k + c];
                                      g[r * k + static_cast<std::size_t>(lab[r])] -= gr;
                                  }
                              });
}

template <class T>
Tensor<T> cross_entropy(const Tensor<T>& logits, int label) {
    if (logits.rank() != 1) throw DimensionError("cross_entropy: expected [K] logits, got " + shape_str(logits.shape()));
    int labels[1] = {label};
    auto rows = cross_entropy(reshape(logits, {1, logits.size()}), std::span<const int>(labels));
    return reshape(rows, {});
}

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
    T s = 0;
    for (auto v : x.values()) s += v;
    auto xn = x.node_ptr();
    return Tensor<T>::from_op({}, {s}, {x}, [xn](auto& self) {
        auto& g = xn->ensure_grad();
        for (auto& v : g) v += self.grad[0];
    });
}

template <class T>
Tensor<T> mean(const Tensor<T>& x) {
    if (x.size() == 0) throw DimensionError("mean of an empty tensor");
    return scale(sum(x), T(1) / T(x.size()));
}

template <class T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
    if (numel(shape) != x.size()) {
        throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
    }
    std::vector<T> out(x.values().begin(), x.values().end());
    auto xn = x.node_ptr();
    return Tensor<T>::from_op(std::move(shape), std::move(out), {x}, [xn](auto& self) {
        auto& g = xn->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
}

template <class T>
Tensor<T> concat_rows(const Tensor<T>& a, const Tensor<T>& b) {
    require_matrix(a.shape(), "concat_rows");
    require_matrix(b.shape(), "concat_rows");
    if (a.cols() != b.cols()) {
        throw DimensionError("concat_rows: widths of " + shape_str(a.shape()) + " and " + shape_str(b.shape()) +
                             " differ");
    }
    std::vector<T> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.values().begin(), a.values().end());
    out.insert(out.end(), b.values().begin(), b.values().end());
    auto an = a.node_ptr(), bn = b.node_ptr();
    const std::size_t split = a.size();
    return Tensor<T>::from_op({a.rows() + b.rows(), a.cols()}, std::move(out), {a, b}, [an, bn, split](auto& self) {
        if (an->requires_grad) {
            auto& g = an->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (bn->requires_grad) {
            auto& g = bn->ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[split + i];
        }
    });
}

template <class T>
Tensor<T> take_rows(const Tensor<T>& x, std::span<const std::size_t> rows) {
    require_matrix(x.shape(), "take_rows");
    const std::size_t w = x.cols();
    std::vector<T> out(rows.size() * w);
    auto xv = x.values();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= x.rows()) {
            throw IndexError("take_rows: row " + std::to_string(rows[i]) + " of " + shape_str(x.shape()));
        }
        std::copy_n(xv.data() + rows[i] * w, w, out.data() + i * w);
    }
    auto xn = x.node_ptr();
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    return Tensor<T>::from_op({rows.size(), w}, std::move(out), {x}, [xn, w, idx = std::move(idx)](auto& self) {
        auto& g = xn->ensure_grad();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < w; ++j) g[idx[i] * w + j] += self.grad[i * w + j];
    });
}

template <class T>
Tensor<T> interleave_rows(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape() || a.rank() != 2) {
        throw DimensionError("interleave_rows: shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
    }
    const std::size_t n = a.rows(), w = a.cols();
    std::vector<T> out(2 * n * w);
    auto av = a.values(), bv = b.values();
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(av.data() + i * w, w, out.data() + (2 * i) * w);
        std::copy_n(bv.data() + i * w, w, out.data() + (2 * i + 1) * w);
    }
    auto an = a.node_ptr(), bn = b.node_ptr();
    return Tensor<T>::from_op({2 * n, w}, std::move(out), {a, b}, [an, bn, n, w](auto& self) {
        for (int which = 0; which < 2; ++which) {
            auto& node = which == 0 ? an : bn;
            if (!node->requires_grad) continue;
            auto& g = node->ensure_grad();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < w; ++j) g[i * w + j] += self.grad[(2 * i + which) * w + j];
        }
    });
}

template <class T>
Tensor<T> repeat_rows(const Tensor<T>& row, std::size_t count) {
    const std::size_t w = row.shape().empty() ? 1 : row.shape().back();
    if (row.size() != w) throw DimensionError("repeat_rows: expected a single row, got " + shape_str(row.shape()));
    std::vector<T> out(count * w);
    for (std::size_t i = 0; i < count; ++i) std::copy_n(row.values().data(), w, out.data() + i * w);
    auto rn = row.node_ptr();
    return Tensor<T>::from_op({count, w}, std::move(out), {row}, [rn, count, w](auto& self) {
        auto& g = rn->ensure_grad();
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t j = 0; j < w; ++j) g[j] += self.grad[i * w + j];
    });
}

namespace {

template <class T>
void rotate_rows(std::span<T> data, std::size_t width, std::span<const std::int64_t> positions,
                 std::size_t head_dim, std::size_t rotary_dims, double base, bool inverse) {
    const std::size_t heads = width / head_dim;
    const std::size_t pairs = rotary_dims / 2;
    std::vector<double> freq(pairs);
    for (std::size_t i = 0; i < pairs; ++i) freq[i] = std::pow(base, -2.0 * double(i) / double(rotary_dims));
    std::vector<T> cs(pairs), sn(pairs);
    for (std::size_t r = 0; r < positions.size(); ++r) {
        for (std::size_t i = 0; i < pairs; ++i) {
            double angle = double(positions[r]) * freq[i];
            cs[i] = T(std::cos(angle));
            sn[i] = T(inverse ? -std::sin(angle) : std::sin(angle));
        }
        for (std::size_t h = 0; h < heads; ++h) {
            T* p = data.data() + r * width + h * head_dim;
            for (std::size_t i = 0; i < pairs; ++i) {
                T x0 = p[2 * i], x1 = p[2 * i + 1];
                p[2 * i] = x0 * cs[i] - x1 * sn[i];
                p[2 * i + 1] = x0 * sn[i] + x1 * cs[i];
            }
        }
    }
}

}  // namespace

template <class T>
Tensor<T> rotary(const Tensor<T>& x, std::span<const std::int64_t> positions, std::size_t head_dim,
                 std::size_t rotary_dims, double base) {
    require_matrix(x.shape(), "rotary");
    const std::size_t n = x.rows(), width = x.cols();
    if (positions.size() != n) {
        throw DimensionError("rotary: " + std::to_string(positions.size()) + " positions for " + shape_str(x.shape()));
    }
    if (head_dim == 0 || width % head_dim != 0 || rotary_dims > head_dim || rotary_dims % 2 != 0) {
        throw DimensionError("rotary: width " + std::to_string(width) + ", head_dim " + std::to_string(head_dim) +
                             ", rotary_dims " + std::to_string(rotary_dims) + " are incompatible");
    }
    std::vector<T> out(x.values().begin(), x.values().end());
    rotate_rows<T>(out, width, positions, head_dim, rotary_dims, base, false);
    auto xn = x.node_ptr();
    std::vector<std::int64_t> pos(positions.begin(), positions.end());
    return Tensor<T>::from_op(x.shape(), std::move(out), {x},
                              [xn, width, head_dim, rotary_dims, base, pos = std::move(pos)](auto& self) {
                                  std::vector<T> g = self.grad;
                                  rotate_rows<T>(g, width, pos, head_dim, rotary_dims, base, true);
                                  auto& gx = xn->ensure_grad();
                                  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
                              });
}

template <class T>
Tensor<T> one_hot(std::span<const int> labels, std::size_t num_classes) {
    std::vector<T> out(labels.size() * num_classes, T(0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw IndexError("one_hot: label " + std::to_string(labels[i]) + " outside [0, " +
                             std::to_string(num_classes) + ")");
        }
        out[i * num_classes + static_cast<std::size_t>(labels[i])] = T(1);
    }
    return Tensor<T>({labels.size(), num_classes}, std::move(out));
}

template <class T>
std::size_t argmax(std::span<const T> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

#define OCLTX_INSTANTIATE(T)                                                                                  \
    template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                            \
    template Tensor<T> transpose(const Tensor<T>&);                                                           \
    template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                               \
    template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                               \
    template Tensor<T> scale(const Tensor<T>&, T);                                                            \
    template Tensor<T> gelu(const Tensor<T>&);                                                                \
    template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);                   \
    template Tensor<T> masked_softmax(const Tensor<T>&, const Mask&);                                         \
    template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const int>);                                 \
    template Tensor<T> cross_entropy(const Tensor<T>&, int);                                                  \
    template Tensor<T> sum(const Tensor<T>&);                                                                 \
    template Tensor<T> mean(const Tensor<T>&);                                                                \
    template Tensor<T> reshape(const Tensor<T>&, Shape);                                                      \
    template Tensor<T> concat_rows(const Tensor<T>&, const Tensor<T>&);                                       \
    template Tensor<T> take_rows(const Tensor<T>&, std::span<const std::size_t>);                             \
    template Tensor<T> interleave_rows(const Tensor<T>&, const Tensor<T>&);                                   \
    template Tensor<T> repeat_rows(const Tensor<T>&, std::size_t);                                            \
    template Tensor<T> rotary(const Tensor<T>&, std::span<const std::int64_t>, std::size_t, std::size_t, double); \
    template Tensor<T> one_hot(std::span<const int>, std::size_t);                                            \
    template std::size_t argmax(std::span<const T>);

OCLTX_INSTANTIATE(float)
OCLTX_INSTANTIATE(double)

#undef OCLTX_INSTANTIATE

}  // namespace ocltx::num
