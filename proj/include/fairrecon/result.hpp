#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace fairrecon {

/// Small value-or-error type. `E` is typically a module error enum (or a
/// struct carrying an enum plus context). Call sites either branch on ok()
/// or use expect() when failure is a programming error.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
  Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<0>(v_); }
  T& value() & { return std::get<0>(v_); }
  T&& take() && { return std::get<0>(std::move(v_)); }

  const E& error() const { return std::get<1>(v_); }

  const T& expect(const char* what) const& {
    if (!ok()) throw std::runtime_error(std::string("unexpected error: ") + what);
    return std::get<0>(v_);
  }

 private:
  std::variant<T, E> v_;
};

/// Unit type for operations that succeed with no payload.
struct Ok {};

}  // namespace fairrecon
