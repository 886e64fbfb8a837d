#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ocltx::model {

// Ring buffer of the `capacity` most recent key/value rows of one block.
//
// Rows are stored already position-encoded. Entry ages always span the most
// recent min(total_tokens_seen, capacity) tokens; the oldest valid row has
// absolute token index total_tokens_seen - size().
template <class T>
class KvCache {
public:
    KvCache() = default;
    KvCache(std::size_t capacity, std::size_t key_dim, std::size_t value_dim);

    void push(std::span<const T> key, std::span<const T> value);
    // Appends every row of row-major [n, key_dim] / [n, value_dim] blocks.
    void push_rows(std::span<const T> keys, std::span<const T> values, std::size_t n);
    void clear();

    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return size_; }
    std::size_t key_dim() const noexcept { return key_dim_; }
    std::size_t value_dim() const noexcept { return value_dim_; }
    std::size_t write_cursor() const noexcept { return cursor_; }
    std::int64_t total_tokens_seen() const noexcept { return total_; }
    std::int64_t oldest_position() const noexcept { return total_ - std::int64_t(size_); }

    // Valid rows, oldest first, as row-major [size(), dim].
    std::vector<T> ordered_keys() const;
    std::vector<T> ordered_values() const;

private:
    std::vector<T> ordered(const std::vector<T>& ring, std::size_t dim) const;

    std::size_t capacity_ = 0;
    std::size_t key_dim_ = 0;
    std::size_t value_dim_ = 0;
    std::vector<T> keys_;
    std::vector<T> values_;
    std::size_t cursor_ = 0;
    std::size_t size_ = 0;
    std::int64_t total_ = 0;
};

// One KvCache per block of a model.
template <class T>
class CacheSet {
public:
    CacheSet() = default;
    CacheSet(std::size_t depth, std::size_t capacity, std::size_t key_dim, std::size_t value_dim);

    std::size_t depth() const noexcept { return blocks_.size(); }
    KvCache<T>& block(std::size_t i) { return blocks_.at(i); }
    const KvCache<T>& block(std::size_t i) const { return blocks_.at(i); }

    // Absolute token index of the next token. Throws StateError if the blocks
    // disagree.
    std::int64_t total_tokens_seen() const;
    void clear();

    // Floats held across all blocks (keys + values).
    std::size_t stored_floats() const;

private:
    std::vector<KvCache<T>> blocks_;
};

}  // namespace ocltx::model
