#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>

namespace pdmp {

inline constexpr std::size_t kMaxDim = 4;

// A point of R^d with d <= kMaxDim, stored inline.
class State {
 public:
  State() = default;
  explicit State(std::size_t dim);
  State(std::initializer_list<double> coords);

  static State from_span(std::span<const double> coords);

  std::size_t dim() const noexcept { return dim_; }
  double operator[](std::size_t i) const noexcept { return c_[i]; }
  double& operator[](std::size_t i) noexcept { return c_[i]; }

  std::span<const double> coords() const noexcept { return {c_.data(), dim_}; }
  std::span<double> coords() noexcept { return {c_.data(), dim_}; }
  const double* begin() const noexcept { return c_.data(); }
  const double* end() const noexcept { return c_.data() + dim_; }

  bool all_finite() const noexcept;

  State& operator+=(const State& other);
  State& operator-=(const State& other);
  State& operator*=(double s) noexcept;

  friend bool operator==(const State& a, const State& b) noexcept;

 private:
  std::array<double, kMaxDim> c_{};
  std::size_t dim_ = 0;
};

State operator+(State a, const State& b);
State operator-(State a, const State& b);
State operator*(double s, State a) noexcept;

double dot(const State& a, const State& b);
double norm(const State& a) noexcept;
double distance(const State& a, const State& b);

std::string to_string(const State& x);

}  // namespace pdmp
