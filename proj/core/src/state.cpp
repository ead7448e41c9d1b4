#include "pdmp/state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pdmp/error.hpp"

namespace pdmp {

namespace {

std::size_t checked_dim(std::size_t dim) {
  if (dim == 0 || dim > kMaxDim) {
    throw DimensionError("state dimension must be in [1, " + std::to_string(kMaxDim) +
                         "], got " + std::to_string(dim));
  }
  return dim;
}

void require_same_dim(const State& a, const State& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  }
}

}  // namespace

State::State(std::size_t dim) : dim_(checked_dim(dim)) {}

State::State(std::initializer_list<double> coords) : dim_(checked_dim(coords.size())) {
  std::copy(coords.begin(), coords.end(), c_.begin());
}

State State::from_span(std::span<const double> coords) {
  State x(coords.size());
  std::copy(coords.begin(), coords.end(), x.c_.begin());
  return x;
}

bool State::all_finite() const noexcept {
  return std::all_of(begin(), end(), [](double v) { return std::isfinite(v); });
}

State& State::operator+=(const State& other) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < dim_; ++i) c_[i] += other.c_[i];
  return *this;
}

State& State::operator-=(const State& other) {
  require_same_dim(*this, other);
  for (std::size_t i = 0; i < dim_; ++i) c_[i] -= other.c_[i];
  return *this;
}

State& State::operator*=(double s) noexcept {
  for (std::size_t i = 0; i < dim_; ++i) c_[i] *= s;
  return *this;
}

bool operator==(const State& a, const State& b) noexcept {
  return a.dim_ == b.dim_ && std::equal(a.begin(), a.end(), b.begin());
}

State operator+(State a, const State& b) { return a += b; }
State operator-(State a, const State& b) { return a -= b; }
State operator*(double s, State a) noexcept { return a *= s; }

double dot(const State& a, const State& b) {
  require_same_dim(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const State& a) noexcept {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc);
}

double distance(const State& a, const State& b) { return norm(a - b); }

std::string to_string(const State& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.dim(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ')';
  return os.str();
}

}  // namespace pdmp
