#include "ocltx/model/kv_cache.hpp"

#include <algorithm>

#include "ocltx/errors.hpp"

namespace ocltx::model {

template <class T>
KvCache<T>::KvCache(std::size_t capacity, std::size_t key_dim, std::size_t value_dim)
    : capacity_(capacity),
      key_dim_(key_dim),
      value_dim_(value_dim),
      keys_(capacity * key_dim),
      values_(capacity * value_dim) {}

template <class T>
void KvCache<T>::push(std::span<const T> key, std::span<const T> value) {
    if (key.size() != key_dim_ || value.size() != value_dim_) {
        throw DimensionError("kv cache: pushing key/value of width " + std::to_string(key.size()) + "/" +
                             std::to_string(value.size()) + " into a cache of width " + std::to_string(key_dim_) +
                             "/" + std::to_string(value_dim_));
    }
    ++total_;
    if (capacity_ == 0) return;
    std::copy(key.begin(), key.end(), keys_.begin() + cursor_ * key_dim_);
    std::copy(value.begin(), value.end(), values_.begin() + cursor_ * value_dim_);
    cursor_ = (cursor_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

template <class T>
void KvCache<T>::push_rows(std::span<const T> keys, std::span<const T> values, std::size_t n) {
    if (keys.size() != n * key_dim_ || values.size() != n * value_dim_) {
        throw DimensionError("kv cache: " + std::to_string(n) + " rows do not match the supplied buffers");
    }
    // Rows that would be overwritten within this call are skipped.
    const std::size_t skip = n > capacity_ ? n - capacity_ : 0;
    total_ += std::int64_t(skip);
    if (capacity_ > 0) cursor_ = (cursor_ + skip) % capacity_;
    for (std::size_t i = skip; i < n; ++i) {
        push(keys.subspan(i * key_dim_, key_dim_), values.subspan(i * value_dim_, value_dim_));
    }
}

template <class T>
void KvCache<T>::clear() {
    cursor_ = 0;
    size_ = 0;
    total_ = 0;
}

template <class T>
std::vector<T> KvCache<T>::ordered(const std::vector<T>& ring, std::size_t dim) const {
    std::vector<T> out(size_ * dim);
    // Oldest valid entry sits at the cursor once the ring has wrapped.
    const std::size_t start = size_ == capacity_ ? cursor_ : 0;
    for (std::size_t i = 0; i < size_; ++i) {
        std::size_t slot = (start + i) % std::max<std::size_t>(capacity_, 1);
        std::copy_n(ring.begin() + slot * dim, dim, out.begin() + i * dim);
    }
    return out;
}

template <class T>
std::vector<T> KvCache<T>::ordered_keys() const {
    return ordered(keys_, key_dim_);
}

template <class T>
std::vector<T> KvCache<T>::ordered_values() const {
    return ordered(values_, value_dim_);
}

template <class T>
CacheSet<T>::CacheSet(std::size_t depth, std::size_t capacity, std::size_t key_dim, std::size_t value_dim)
    : blocks_(depth, KvCache<T>(capacity, key_dim, value_dim)) {}

template <class T>
std::int64_t CacheSet<T>::total_tokens_seen() const {
    if (blocks_.empty()) return 0;
    const auto n = blocks_.front().total_tokens_seen();
    for (const auto& b : blocks_) {
        if (b.total_tokens_seen() != n) {
            throw StateError("kv caches disagree on tokens seen: " + std::to_string(n) + " vs " +
                             std::to_string(b.total_tokens_seen()));
        }
    }
    return n;
}

template <class T>
void CacheSet<T>::clear() {
    for (auto& b : blocks_) b.clear();
}

template <class T>
std::size_t CacheSet<T>::stored_floats() const {
    std::size_t n = 0;
    for (const auto& b : blocks_) n += b.size() * (b.key_dim() + b.value_dim());
    return n;
}

template class KvCache<float>;
template class KvCache<double>;
template class CacheSet<float>;
template class CacheSet<double>;

}  // namespace ocltx::model
