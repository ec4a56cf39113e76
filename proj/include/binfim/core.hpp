#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <type_traits>

namespace binfim {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using ConstVectorRef = Eigen::Ref<const VectorX<Scalar>>;

/// Non-deduced Ref parameter: Scalar is pinned by the main domain argument
/// (model, rule, scheme), so callers can pass any dense vector expression.
template <typename Scalar>
using ConstVectorArg = std::type_identity_t<ConstVectorRef<Scalar>>;

/// Error in the numerical domain of an operation (nonpositive mean density,
/// empty bin, broken partition, ...) as opposed to malformed caller input.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Compensated (Kahan) accumulator; keeps long reductions accurate
/// independent of term count, with a fixed deterministic order.
template <typename Scalar>
class KahanSum {
 public:
  void add(Scalar x) {
    const Scalar y = x - comp_;
    const Scalar t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  Scalar value() const { return sum_; }

 private:
  Scalar sum_{0};
  Scalar comp_{0};
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail
}  // namespace binfim
