#include "ocltx/numerics/attention.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>

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

struct Span {
    std::size_t lo = 0;
    std::size_t hi = 0;  // exclusive; lo == hi means nothing attendable
};

std::vector<Span> attendable_spans(const Mask& mask) {
    std::vector<Span> spans(mask.rows);
    for (std::size_t r = 0; r < mask.rows; ++r) {
        std::size_t lo = mask.cols, hi = 0;
        for (std::size_t c = 0; c < mask.cols; ++c) {
            if (mask.at(r, c)) {
                lo = std::min(lo, c);
                hi = c + 1;
            }
        }
        if (hi > lo) spans[r] = {lo, hi};
    }
    return spans;
}

}  // namespace

template <class T>
Tensor<T> mqa_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v, const Mask& mask,
                        std::size_t heads, AttentionWeights<T>* weights_out) {
    if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) {
        throw DimensionError("mqa_attention: expected matrices, got q " + shape_str(q.shape()) + ", k " +
                             shape_str(k.shape()) + ", v " + shape_str(v.shape()));
    }
    const std::size_t t = q.rows(), n = k.rows(), dk = k.cols(), dv = v.cols();
    if (heads == 0 || q.cols() != heads * dk || v.rows() != n || mask.rows != t || mask.cols != n) {
        throw DimensionError("mqa_attention: q " + shape_str(q.shape()) + ", k " + shape_str(k.shape()) + ", v " +
                             shape_str(v.shape()) + ", mask [" + std::to_string(mask.rows) + "," +
                             std::to_string(mask.cols) + "] with " + std::to_string(heads) + " heads");
    }
    const T scale = T(1) / std::sqrt(T(dk));
    auto spans = attendable_spans(mask);

    std::vector<T> out(t * heads * dv, T(0));
    // Per query: [heads, span] weights, stored back to back.
    std::vector<std::size_t> offsets(t + 1, 0);
    for (std::size_t i = 0; i < t; ++i) offsets[i + 1] = offsets[i] + heads * (spans[i].hi - spans[i].lo);
    std::vector<T> probs(offsets[t]);

    auto qv = q.values(), kv = k.values(), vv = v.values();
    std::uint64_t macs = 0;
    for (std::size_t i = 0; i < t; ++i) {
        const auto [lo, hi] = spans[i];
        const std::size_t len = hi - lo;
        if (len == 0) continue;
        Map<T> p(probs.data() + offsets[i], heads, len);
        p.noalias() = MapC<T>(qv.data() + i * heads * dk, heads, dk) * MapC<T>(kv.data() + lo * dk, len, dk).transpose();
        p *= scale;
        for (std::size_t h = 0; h < heads; ++h) {
            T mx = -std::numeric_limits<T>::infinity();
            for (std::size_t c = 0; c < len; ++c)
                if (mask.at(i, lo + c)) mx = std::max(mx, p(h, c));
            T z = 0;
            for (std::size_t c = 0; c < len; ++c) {
                T e = mask.at(i, lo + c) ? std::exp(p(h, c) - mx) : T(0);
                p(h, c) = e;
                z += e;
            }
            p.row(h) /= z;
        }
        Map<T>(out.data() + i * heads * dv, heads, dv).noalias() = p * MapC<T>(vv.data() + lo * dv, len, dv);
        macs += heads * len * (dk + dv);
    }
    mac_counter().forward += macs;

    if (weights_out) {
        weights_out->rows = t * heads;
        weights_out->cols = n;
        weights_out->weights.assign(t * heads * n, T(0));
        for (std::size_t i = 0; i < t; ++i) {
            const std::size_t len = spans[i].hi - spans[i].lo;
            for (std::size_t h = 0; h < heads; ++h)
                for (std::size_t c = 0; c < len; ++c)
                    weights_out->weights[(i * heads + h) * n + spans[i].lo + c] = probs[offsets[i] + h * len + c];
        }
    }

    auto qn = q.node_ptr(), kn = k.node_ptr(), vn = v.node_ptr();
    return Tensor<T>::from_op(
        {t, heads * dv}, std::move(out), {q, k, v},
        [qn, kn, vn, t, heads, dk, dv, scale, spans = std::move(spans), offsets = std::move(offsets),
         probs = std::move(probs)](auto& self) {
            T* gq = qn->requires_grad ? qn->ensure_grad().data() : nullptr;
            T* gk = kn->requires_grad ? kn->ensure_grad().data() : nullptr;
            T* gv = vn->requires_grad ? vn->ensure_grad().data() : nullptr;
            RowMat<T> dp;
            std::uint64_t macs = 0;
            for (std::size_t i = 0; i < t; ++i) {
                const auto [lo, hi] = spans[i];
                const std::size_t len = hi - lo;
                if (len == 0) continue;
                MapC<T> p(probs.data() + offsets[i], heads, len);
                MapC<T> dout(self.grad.data() + i * heads * dv, heads, dv);
                MapC<T> vblk(vn->value.data() + lo * dv, len, dv);
                if (gv) {
                    Map<T>(gv + lo * dv, len, dv).noalias() += p.transpose() * dout;
                    macs += heads * len * dv;
                }
                if (!gq && !gk) continue;
                dp.noalias() = dout * vblk.transpose();
                macs += heads * len * dv;
                for (std::size_t h = 0; h < heads; ++h) {
                    T dot = p.row(h).dot(dp.row(h));
                    dp.row(h) = (p.row(h).array() * (dp.row(h).array() - dot)).matrix() * scale;
                }
                if (gq) {
                    Map<T>(gq + i * heads * dk, heads, dk).noalias() += dp * MapC<T>(kn->value.data() + lo * dk, len, dk);
                    macs += heads * len * dk;
                }
                if (gk) {
                    Map<T>(gk + lo * dk, len, dk).noalias() +=
                        dp.transpose() * MapC<T>(qn->value.data() + i * heads * dk, heads, dk);
                    macs += heads * len * dk;
                }
            }
            mac_counter().backward += macs;
        });
}

template Tensor<float> mqa_attention(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, const Mask&,
                                     std::size_t, AttentionWeights<float>*);
template Tensor<double> mqa_attention(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                      const Mask&, std::size_t, AttentionWeights<double>*);

}  // namespace ocltx::num
