#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ocltx {

// Shape or width mismatch between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Invalid hyper-parameters or configuration files. `field` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Inconsistent runtime state, e.g. caches of one model disagreeing on the token count.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed binary input; `offset` is the byte position where parsing failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& message, std::uint64_t offset)
        : std::runtime_error(message + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

// A loss or gradient became NaN/Inf. Training aborts; nothing is clipped.
class NonFiniteError : public std::runtime_error {
public:
    NonFiniteError(const std::string& message, std::int64_t step, std::int64_t stream = -1,
                   std::int64_t position = -1)
        : std::runtime_error(message), step_(step), stream_(stream), position_(position) {}

    std::int64_t step() const noexcept { return step_; }
    std::int64_t stream() const noexcept { return stream_; }
    std::int64_t position() const noexcept { return position_; }

private:
    std::int64_t step_;
    std::int64_t stream_;
    std::int64_t position_;
};

}  // namespace ocltx
