#pragma once

#include <binfim/core.hpp>

#include <utility>

namespace binfim {

/// Axis-aligned box in q dimensions (q = 1, 2 or 3): the domain of event
/// attribute vectors.
template <typename Scalar>
class AttributeSpace {
 public:
  AttributeSpace(VectorX<Scalar> lower, VectorX<Scalar> upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size())
      throw std::invalid_argument("attribute space bounds must have equal dimension");
    if (lower_.size() < 1 || lower_.size() > 3)
      throw std::invalid_argument("attribute space dimension must be 1, 2 or 3");
    for (Index d = 0; d < lower_.size(); ++d)
      if (!(upper_[d] > lower_[d]))
        throw std::invalid_argument("attribute space requires upper > lower on every axis");
  }

  Index dim() const { return lower_.size(); }
  const VectorX<Scalar>& lower() const { return lower_; }
  const VectorX<Scalar>& upper() const { return upper_; }
  VectorX<Scalar> extent() const { return upper_ - lower_; }
  Scalar volume() const { return (upper_ - lower_).prod(); }

  /// Closed-box membership.
  bool contains(ConstVectorRef<Scalar> a) const {
    if (a.size() != dim()) return false;
    return (a.array() >= lower_.array()).all() && (a.array() <= upper_.array()).all();
  }

  bool same_box(const AttributeSpace& other) const {
    return dim() == other.dim() && lower_ == other.lower_ && upper_ == other.upper_;
  }

 private:
  VectorX<Scalar> lower_;
  VectorX<Scalar> upper_;
};

/// 1D interval [lo, hi].
template <typename Scalar>
AttributeSpace<Scalar> make_interval(Scalar lo, Scalar hi) {
  VectorX<Scalar> l(1), u(1);
  l << lo;
  u << hi;
  return AttributeSpace<Scalar>(std::move(l), std::move(u));
}

}  // namespace binfim
