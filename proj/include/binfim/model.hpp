#pragma once

#include <binfim/quadrature.hpp>

#include <cmath>
#include <functional>
#include <sstream>
#include <utility>

namespace binfim {

/// Parametric family of mean data functions: the expected event density over
/// the attribute space as a function of the object parameter vector, together
/// with its exact parameter gradient. Evaluation is pure; instances are
/// immutable after construction.
template <typename Scalar>
class ParametricModel {
 public:
  using MeanFn = std::function<Scalar(ConstVectorRef<Scalar>, ConstVectorRef<Scalar>)>;
  using GradFn = std::function<VectorX<Scalar>(ConstVectorRef<Scalar>, ConstVectorRef<Scalar>)>;

  ParametricModel(AttributeSpace<Scalar> space, Index param_dim, MeanFn mean, GradFn grad)
      : space_(std::move(space)), param_dim_(param_dim), mean_(std::move(mean)), grad_(std::move(grad)) {
    if (param_dim_ < 1) throw std::invalid_argument("model parameter dimension must be >= 1");
    if (!mean_ || !grad_) throw std::invalid_argument("model requires mean and gradient callables");
  }

  const AttributeSpace<Scalar>& space() const { return space_; }
  Index param_dim() const { return param_dim_; }

  /// Unchecked evaluators; callers are responsible for bounds and positivity.
  Scalar mean_raw(ConstVectorRef<Scalar> a, ConstVectorRef<Scalar> theta) const {
    return mean_(a, theta);
  }
  VectorX<Scalar> grad_raw(ConstVectorRef<Scalar> a, ConstVectorRef<Scalar> theta) const {
    return grad_(a, theta);
  }

 private:
  AttributeSpace<Scalar> space_;
  Index param_dim_;
  MeanFn mean_;
  GradFn grad_;
};

namespace detail {

template <typename Scalar>
void check_theta_dim(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta) {
  if (theta.size() != model.param_dim())
    throw std::invalid_argument("theta length must match model parameter dimension");
}

template <typename Scalar>
[[noreturn]] void throw_nonpositive(ConstVectorRef<Scalar> a, Scalar value) {
  std::ostringstream os;
  os << "nonpositive mean density (" << value << ") at a = (";
  for (Index d = 0; d < a.size(); ++d) os << (d ? ", " : "") << a[d];
  os << ")";
  throw DomainError(os.str());
}

}  // namespace detail

/// Mean event density at a point; strictly positive by contract.
template <typename Scalar>
Scalar mean_at(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> a,
               ConstVectorArg<Scalar> theta) {
  detail::check_theta_dim(model, theta);
  if (!model.space().contains(a)) throw DomainError("point outside attribute space");
  const Scalar v = model.mean_raw(a, theta);
  if (!(v > 0)) detail::throw_nonpositive<Scalar>(a, v);
  return v;
}

/// Parameter gradient of the mean density at a point.
template <typename Scalar>
VectorX<Scalar> grad_mean_at(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> a,
                             ConstVectorArg<Scalar> theta) {
  detail::check_theta_dim(model, theta);
  if (!model.space().contains(a)) throw DomainError("point outside attribute space");
  VectorX<Scalar> g = model.grad_raw(a, theta);
  if (g.size() != model.param_dim())
    throw std::invalid_argument("model gradient has wrong dimension");
  return g;
}

/// Mean density sampled at every rule node, validated strictly positive.
template <typename Scalar>
VectorX<Scalar> sample_mean(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                            const NodeRule<Scalar>& rule) {
  detail::check_theta_dim(model, theta);
  VectorX<Scalar> values(rule.node_count());
  for (Index i = 0; i < rule.node_count(); ++i) {
    const Scalar v = model.mean_raw(rule.node(i), theta);
    if (!(v > 0)) detail::throw_nonpositive<Scalar>(rule.node(i), v);
    values[i] = v;
  }
  return values;
}

/// Mean-density gradient sampled at every rule node, one column per node.
template <typename Scalar>
MatrixX<Scalar> sample_grad(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                            const NodeRule<Scalar>& rule) {
  detail::check_theta_dim(model, theta);
  MatrixX<Scalar> grads(model.param_dim(), rule.node_count());
  for (Index i = 0; i < rule.node_count(); ++i) {
    VectorX<Scalar> g = model.grad_raw(rule.node(i), theta);
    if (g.size() != model.param_dim())
      throw std::invalid_argument("model gradient has wrong dimension");
    grads.col(i) = g;
  }
  return grads;
}

/// Total expected event count: the integral of the mean density.
template <typename Scalar>
Scalar total_mean(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                  const NodeRule<Scalar>& rule) {
  return integrate(rule, sample_mean(model, theta, rule));
}

/// Max relative deviation between the model gradient and a central finite
/// difference of the mean, over randomly sampled interior points.
template <typename Scalar>
Scalar grad_check(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                  Index n_samples, Scalar step) {
  detail::check_theta_dim(model, theta);
  if (n_samples < 1) throw std::invalid_argument("grad_check requires n_samples >= 1");
  if (!(step > 0)) throw std::invalid_argument("grad_check requires step > 0");

  std::uint64_t state = 0x5eedu;
  const auto& space = model.space();
  VectorX<Scalar> a(space.dim());
  VectorX<Scalar> tp = theta, tm = theta;
  Scalar worst = 0;
  for (Index s = 0; s < n_samples; ++s) {
    for (Index d = 0; d < space.dim(); ++d) {
      const Scalar u = Scalar(detail::splitmix64(state) >> 11) * Scalar(0x1.0p-53);
      a[d] = space.lower()[d] + u * (space.upper()[d] - space.lower()[d]);
    }
    const VectorX<Scalar> g = model.grad_raw(a, theta);
    Scalar err = 0;
    for (Index k = 0; k < model.param_dim(); ++k) {
      tp = theta;
      tm = theta;
      tp[k] += step;
      tm[k] -= step;
      const Scalar fd = (model.mean_raw(a, tp) - model.mean_raw(a, tm)) / (2 * step);
      err = std::max(err, std::abs(g[k] - fd));
    }
    const Scalar scale = std::max(g.cwiseAbs().maxCoeff(), Scalar(1e-8));
    worst = std::max(worst, err / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Model zoo
// ---------------------------------------------------------------------------

/// Flat density theta[0] on the whole space.
template <typename Scalar>
ParametricModel<Scalar> make_constant_model(AttributeSpace<Scalar> space) {
  return ParametricModel<Scalar>(
      std::move(space), 1,
      [](ConstVectorRef<Scalar>, ConstVectorRef<Scalar> theta) { return theta[0]; },
      [](ConstVectorRef<Scalar>, ConstVectorRef<Scalar>) {
        return VectorX<Scalar>::Ones(1).eval();
      });
}

/// theta[0] + theta[1] * a on the unit interval.
template <typename Scalar>
ParametricModel<Scalar> make_affine_model() {
  return ParametricModel<Scalar>(
      make_interval<Scalar>(0, 1), 2,
      [](ConstVectorRef<Scalar> a, ConstVectorRef<Scalar> theta) {
        return theta[0] + theta[1] * a[0];
      },
      [](ConstVectorRef<Scalar> a, ConstVectorRef<Scalar>) {
        VectorX<Scalar> g(2);
        g << Scalar(1), a[0];
        return g;
      });
}

/// theta[0] times a fixed positive profile.
template <typename Scalar>
ParametricModel<Scalar> make_scaled_profile_model(
    AttributeSpace<Scalar> space,
    std::type_identity_t<std::function<Scalar(ConstVectorRef<Scalar>)>> profile) {
  if (!profile) throw std::invalid_argument("scaled-profile model requires a profile");
  return ParametricModel<Scalar>(
      std::move(space), 1,
      [profile](ConstVectorRef<Scalar> a, ConstVectorRef<Scalar> theta) {
        return theta[0] * profile(a);
      },
      [profile](ConstVectorRef<Scalar> a, ConstVectorRef<Scalar>) {
        VectorX<Scalar> g(1);
        g << profile(a);
        return g;
      });
}

/// Sum of isotropic Gaussian bumps plus a flat background. Parameter layout:
/// [amplitudes (k), centers (k blocks of q), widths (k), background].
template <typename Scalar>
ParametricModel<Scalar> make_gaussian_mixture_model(AttributeSpace<Scalar> space, Index n_bumps) {
  if (n_bumps < 1) throw std::invalid_argument("gaussian mixture requires at least one bump");
  const Index q = space.dim();
  const Index p = n_bumps * (q + 2) + 1;
  auto mean = [n_bumps, q](ConstVectorRef<Scalar> a, ConstVectorRef<Scalar> theta) {
    Scalar v = theta[theta.size() - 1];
    for (Index j = 0; j < n_bumps; ++j) {
      const Scalar amp = theta[j];
      const auto center = theta.segment(n_bumps + j * q, q);
      const Scalar width = theta[n_bumps + n_bumps * q + j];
      const Scalar r2 = (a - center).squaredNorm();
      v += amp * std::exp(-r2 / (2 * width * width));
    }
    return v;
  };
  auto grad = [n_bumps, q, p](ConstVectorRef<Scalar> a, ConstVectorRef<Scalar> theta) {
    VectorX<Scalar> g = VectorX<Scalar>::Zero(p);
    for (Index j = 0; j < n_bumps; ++j) {
      const Scalar amp = theta[j];
      const auto center = theta.segment(n_bumps + j * q, q);
      const Scalar width = theta[n_bumps + n_bumps * q + j];
      const VectorX<Scalar> diff = a - center;
      const Scalar r2 = diff.squaredNorm();
      const Scalar e = std::exp(-r2 / (2 * width * width));
      g[j] = e;
      g.segment(n_bumps + j * q, q) = amp * e * diff / (width * width);
      g[n_bumps + n_bumps * q + j] = amp * e * r2 / (width * width * width);
    }
    g[p - 1] = 1;
    return g;
  };
  return ParametricModel<Scalar>(std::move(space), p, std::move(mean), std::move(grad));
}

}  // namespace binfim
