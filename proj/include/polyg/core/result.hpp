#pragma once

#include <cassert>
#include <string>
#include <utility>
#include <variant>

namespace polyg {

// Generic error payload. Modules that need richer diagnostics define their
// own error structs and use Result<T, TheirError>.
struct Error {
    std::string message;
};

// Minimal expected-like type. The toolchain targets C++20, where
// std::expected is not yet available, so errors travel by value in this
// small wrapper instead of exceptions.
template <typename T, typename E = Error>
class Result {
public:
    Result(T value) : data_(std::in_place_index<0>, std::move(value)) {}
    Result(E error) : data_(std::in_place_index<1>, std::move(error)) {}

    bool ok() const { return data_.index() == 0; }
    explicit operator bool() const { return ok(); }

    T& value() {
        assert(ok());
        return std::get<0>(data_);
    }
    const T& value() const {
        assert(ok());
        return std::get<0>(data_);
    }
    E& error() {
        assert(!ok());
        return std::get<1>(data_);
    }
    const E& error() const {
        assert(!ok());
        return std::get<1>(data_);
    }

    T& operator*() { return value(); }
    const T& operator*() const { return value(); }
    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

private:
    std::variant<T, E> data_;
};

// Value type for operations that succeed without a payload.
struct Ok {
    bool operator==(const Ok&) const = default;
};

}  // namespace polyg
