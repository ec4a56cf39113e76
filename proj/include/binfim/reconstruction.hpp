#pragma once

#include <binfim/fisher.hpp>

#include <cmath>
#include <sstream>
#include <utility>

namespace binfim {

/// Midpoint-sampled 1D object grid: n_points samples of spacing
/// (upper - lower) / n_points covering the support exactly.
template <typename Scalar>
class ObjectGrid {
 public:
  ObjectGrid(Scalar lower, Scalar upper, Index n_points)
      : lower_(lower), upper_(upper), n_points_(n_points) {
    if (!(upper > lower)) throw std::invalid_argument("object support requires upper > lower");
    if (n_points < 2) throw std::invalid_argument("object grid requires n_points >= 2");
  }
  Scalar lower() const { return lower_; }
  Scalar upper() const { return upper_; }
  Index n_points() const { return n_points_; }
  Scalar spacing() const { return (upper_ - lower_) / Scalar(n_points_); }
  Scalar point(Index k) const { return lower_ + (Scalar(k) + Scalar(0.5)) * spacing(); }

 private:
  Scalar lower_;
  Scalar upper_;
  Index n_points_;
};

/// Object functions are sample vectors on an ObjectGrid.
template <typename Scalar>
using ObjectFunction = VectorX<Scalar>;

/// Band-limited point spread function value: bandwidth * sinc(bandwidth * x)
/// with sinc(u) = sin(pi u) / (pi u). Its spectrum is the unit rect on
/// [-bandwidth/2, bandwidth/2]; the x = 0 singularity is removable.
template <typename Scalar>
Scalar bandlimited_psf_values(Scalar bandwidth, Scalar x) {
  if (!(bandwidth > 0)) throw std::invalid_argument("bandwidth must be > 0");
  const Scalar pi = Scalar(3.14159265358979323846L);
  const Scalar u = pi * bandwidth * x;
  if (std::abs(u) < Scalar(1e-8)) return bandwidth * (1 - u * u / 6);
  return bandwidth * std::sin(u) / u;
}

/// Point spread function: unit-area Gaussian or band-limited sinc, times an
/// amplitude scale.
template <typename Scalar>
class PsfSpec {
 public:
  enum class Kind { Gaussian, BandlimitedSinc };

  static PsfSpec gaussian(Scalar width, Scalar scale = 1) {
    if (!(width > 0)) throw std::invalid_argument("gaussian psf requires width > 0");
    return PsfSpec(Kind::Gaussian, width, scale);
  }
  static PsfSpec bandlimited_sinc(Scalar bandwidth, Scalar scale = 1) {
    if (!(bandwidth > 0)) throw std::invalid_argument("sinc psf requires bandwidth > 0");
    return PsfSpec(Kind::BandlimitedSinc, bandwidth, scale);
  }

  Kind kind() const { return kind_; }
  Scalar parameter() const { return parameter_; }  // width or bandwidth
  Scalar scale() const { return scale_; }

  Scalar operator()(Scalar x) const {
    if (kind_ == Kind::Gaussian) {
      const Scalar inv_norm = Scalar(1) / (parameter_ * Scalar(2.50662827463100050242L));
      return scale_ * inv_norm * std::exp(-x * x / (2 * parameter_ * parameter_));
    }
    return scale_ * bandlimited_psf_values(parameter_, x);
  }

 private:
  PsfSpec(Kind kind, Scalar parameter, Scalar scale)
      : kind_(kind), parameter_(parameter), scale_(scale) {}
  Kind kind_;
  Scalar parameter_;
  Scalar scale_;
};

/// Linear map from object samples to mean-density values at the attribute
/// quadrature nodes.
template <typename Scalar>
class SystemOperator {
 public:
  explicit SystemOperator(MatrixX<Scalar> kernel) : kernel_(std::move(kernel)) {}
  Index node_count() const { return kernel_.rows(); }
  Index object_dim() const { return kernel_.cols(); }
  const MatrixX<Scalar>& kernel() const { return kernel_; }

  VectorX<Scalar> apply(ConstVectorRef<Scalar> f) const {
    if (f.size() != object_dim())
      throw std::invalid_argument("object function length must match operator");
    return kernel_ * f;
  }

 private:
  MatrixX<Scalar> kernel_;
};

/// Convolution of the object with a PSF, discretized on the object grid:
/// kernel(i, k) = p(x_i - r_k) * spacing. 1D attribute spaces only.
template <typename Scalar>
SystemOperator<Scalar> build_convolution_operator(const PsfSpec<Scalar>& psf,
                                                  const ObjectGrid<Scalar>& object_grid,
                                                  const NodeRule<Scalar>& rule) {
  if (rule.dim() != 1)
    throw DomainError("dimension mismatch: convolution operator requires a 1D attribute space");
  MatrixX<Scalar> kernel(rule.node_count(), object_grid.n_points());
  const Scalar dr = object_grid.spacing();
  for (Index i = 0; i < rule.node_count(); ++i) {
    const Scalar x = rule.node(i)[0];
    for (Index k = 0; k < object_grid.n_points(); ++k)
      kernel(i, k) = psf(x - object_grid.point(k)) * dr;
  }
  return SystemOperator<Scalar>(std::move(kernel));
}

/// Mean-density node values for an object.
template <typename Scalar>
VectorX<Scalar> apply_system(const SystemOperator<Scalar>& op, ConstVectorArg<Scalar> f) {
  return op.apply(f);
}

/// Binned system matrix: per-bin integrals of each kernel column, so that
/// binned_system * f reproduces apply_binning(apply_system(f)) to roundoff.
template <typename Scalar>
MatrixX<Scalar> binned_system(const SystemOperator<Scalar>& op, const BinningScheme<Scalar>& scheme,
                              const NodeRule<Scalar>& rule) {
  if (op.node_count() != rule.node_count())
    throw std::invalid_argument("operator was built for a different rule");
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");
  MatrixX<Scalar> binned(scheme.bin_count(), op.object_dim());
  for (Index k = 0; k < op.object_dim(); ++k)
    binned.col(k) = integrate_per_bin(rule, op.kernel().col(k));
  return binned;
}

namespace detail {

template <typename Scalar>
VectorX<Scalar> system_mean_checked(const SystemOperator<Scalar>& op, const NodeRule<Scalar>& rule,
                                    ConstVectorArg<Scalar> f) {
  if (op.node_count() != rule.node_count())
    throw std::invalid_argument("operator was built for a different rule");
  VectorX<Scalar> mean = op.apply(f);
  for (Index i = 0; i < mean.size(); ++i)
    if (!(mean[i] > 0)) {
      std::ostringstream os;
      os << "nonpositive mean density (" << mean[i] << ") at node x = " << rule.node(i)[0];
      throw DomainError(os.str());
    }
  return mean;
}

}  // namespace detail

/// Information loss for a perturbation of the object function, with the mean
/// density given by the system operator applied to the object.
template <typename Scalar>
LossReport<Scalar> loss_object(const SystemOperator<Scalar>& op, const BinningScheme<Scalar>& scheme,
                               const NodeRule<Scalar>& rule, ConstVectorArg<Scalar> f,
                               ConstVectorArg<Scalar> delta_f) {
  if (delta_f.size() != op.object_dim())
    throw std::invalid_argument("object function length must match operator");
  if (delta_f.isZero(0)) throw DomainError("zero perturbation");
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");
  const VectorX<Scalar> mean = detail::system_mean_checked(op, rule, f);
  const VectorX<Scalar> gamma = op.apply(delta_f);
  return loss_from_samples(rule, mean, gamma, VectorX<Scalar>(delta_f));
}

/// Null component of the propagated perturbation; identically zero exactly
/// when binning loses no information about this perturbation.
template <typename Scalar>
VectorX<Scalar> equality_residual(const SystemOperator<Scalar>& op, const BinningScheme<Scalar>& scheme,
                                  const NodeRule<Scalar>& rule, ConstVectorArg<Scalar> f,
                                  ConstVectorArg<Scalar> delta_f) {
  if (delta_f.size() != op.object_dim())
    throw std::invalid_argument("object function length must match operator");
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");
  const VectorX<Scalar> mean = detail::system_mean_checked(op, rule, f);
  const VectorX<Scalar> gamma = op.apply(delta_f);
  auto [gamma1, gamma0] = detail::project_with_means<Scalar>(gamma, mean, rule);
  return std::move(gamma0);
}

}  // namespace binfim
