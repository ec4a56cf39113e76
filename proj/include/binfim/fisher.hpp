#pragma once

#include <binfim/binning.hpp>

#include <cmath>

namespace binfim {

/// Fisher information matrix: p x p, symmetric positive semidefinite.
template <typename Scalar>
using Fim = MatrixX<Scalar>;

/// The information lost to binning for one perturbation direction, computed
/// three algebraically identical ways:
///   loss_direct     = quadform_lm - quadform_binned,
///   loss_null_norm  = weighted norm^2 of the null component of gamma,
///   loss_per_bin    = per-bin squared deviation terms, summing to the same.
/// All three live on one shared node rule, so they agree to roundoff.
template <typename Scalar>
struct LossReport {
  Scalar quadform_lm = 0;
  Scalar quadform_binned = 0;
  Scalar loss_direct = 0;
  Scalar loss_null_norm = 0;
  Scalar loss_per_bin_total = 0;
  VectorX<Scalar> loss_per_bin;
  VectorX<Scalar> perturbation;
};

/// Ideal-observer separability index and the matching area under the ROC
/// curve, auc = 1/2 + erf(d/2)/2.
template <typename Scalar>
struct Detectability {
  Scalar d_squared = 0;
  Scalar d = 0;
  Scalar auc = Scalar(0.5);
};

/// List-mode FIM: the weighted outer-product integral of the mean-density
/// gradient over the attribute space.
template <typename Scalar>
Fim<Scalar> fim_list_mode(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                          const NodeRule<Scalar>& rule) {
  const VectorX<Scalar> means = sample_mean(model, theta, rule);
  const MatrixX<Scalar> grads = sample_grad(model, theta, rule);
  const VectorX<Scalar> scale = (rule.weights().array() / means.array()).sqrt().matrix();
  const MatrixX<Scalar> scaled = grads * scale.asDiagonal();
  MatrixX<Scalar> fim = MatrixX<Scalar>::Zero(model.param_dim(), model.param_dim());
  fim.template selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  return MatrixX<Scalar>(fim.template selfadjointView<Eigen::Lower>());
}

namespace detail {

/// Per-bin integrals of the mean and of every gradient component.
template <typename Scalar>
std::pair<VectorX<Scalar>, MatrixX<Scalar>> binned_moments(const ParametricModel<Scalar>& model,
                                                           ConstVectorArg<Scalar> theta,
                                                           const NodeRule<Scalar>& rule) {
  const VectorX<Scalar> means = sample_mean(model, theta, rule);
  const MatrixX<Scalar> grads = sample_grad(model, theta, rule);
  VectorX<Scalar> bin_mean = integrate_per_bin(rule, means);
  for (Index m = 0; m < bin_mean.size(); ++m)
    if (!(bin_mean[m] > 0)) throw DomainError("empty bin mean in bin " + std::to_string(m));
  MatrixX<Scalar> bin_grad(model.param_dim(), rule.bin_count());
  for (Index k = 0; k < model.param_dim(); ++k)
    bin_grad.row(k) = integrate_per_bin(rule, grads.row(k).transpose()).transpose();
  return {std::move(bin_mean), std::move(bin_grad)};
}

}  // namespace detail

/// Binned FIM: the outer-product sum over bins of the binned gradient,
/// weighted by reciprocal bin means.
template <typename Scalar>
Fim<Scalar> fim_binned(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                       const BinningScheme<Scalar>& scheme, const NodeRule<Scalar>& rule) {
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");
  auto [bin_mean, bin_grad] = detail::binned_moments(model, theta, rule);
  const VectorX<Scalar> scale = bin_mean.array().rsqrt().matrix();
  const MatrixX<Scalar> scaled = bin_grad * scale.asDiagonal();
  MatrixX<Scalar> fim = MatrixX<Scalar>::Zero(model.param_dim(), model.param_dim());
  fim.template selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  return MatrixX<Scalar>(fim.template selfadjointView<Eigen::Lower>());
}

/// Loss computation core shared by the parametric and object variants: the
/// mean density and the perturbation direction are given as node functions.
template <typename Scalar>
LossReport<Scalar> loss_from_samples(const NodeRule<Scalar>& rule, const VectorX<Scalar>& mean_values,
                                     const VectorX<Scalar>& gamma, VectorX<Scalar> perturbation) {
  if (mean_values.size() != rule.node_count() || gamma.size() != rule.node_count())
    throw std::invalid_argument("node function length must match rule node count");

  LossReport<Scalar> report;
  report.perturbation = std::move(perturbation);

  const VectorX<Scalar> bin_gamma = integrate_per_bin(rule, gamma);
  const VectorX<Scalar> bin_mean = integrate_per_bin(rule, mean_values);
  for (Index m = 0; m < bin_mean.size(); ++m)
    if (!(bin_mean[m] > 0)) throw DomainError("empty bin mean in bin " + std::to_string(m));
  const VectorX<Scalar> coef = bin_gamma.cwiseQuotient(bin_mean);

  report.quadform_lm = weighted_norm_sq(rule, gamma, mean_values);

  detail::KahanSum<Scalar> binned;
  for (Index m = 0; m < bin_gamma.size(); ++m) binned.add(bin_gamma[m] * bin_gamma[m] / bin_mean[m]);
  report.quadform_binned = binned.value();
  report.loss_direct = report.quadform_lm - report.quadform_binned;

  // Null-component route: ||gamma0||^2 in the weighted inner product.
  detail::KahanSum<Scalar> null_acc;
  for (Index i = 0; i < rule.node_count(); ++i) {
    const Scalar g0 = gamma[i] - mean_values[i] * coef[rule.bin_of_node()[i]];
    null_acc.add(rule.weights()[i] * g0 * g0 / mean_values[i]);
  }
  report.loss_null_norm = null_acc.value();

  // Per-bin route: squared deviation of gamma/mean from its bin ratio,
  // weighted by the mean.
  VectorX<Scalar> sums = VectorX<Scalar>::Zero(rule.bin_count());
  VectorX<Scalar> comps = VectorX<Scalar>::Zero(rule.bin_count());
  for (Index i = 0; i < rule.node_count(); ++i) {
    const Index m = rule.bin_of_node()[i];
    const Scalar dev = gamma[i] / mean_values[i] - coef[m];
    const Scalar x = rule.weights()[i] * dev * dev * mean_values[i];
    const Scalar y = x - comps[m];
    const Scalar t = sums[m] + y;
    comps[m] = (t - sums[m]) - y;
    sums[m] = t;
  }
  report.loss_per_bin = std::move(sums);
  detail::KahanSum<Scalar> total;
  for (Index m = 0; m < report.loss_per_bin.size(); ++m) total.add(report.loss_per_bin[m]);
  report.loss_per_bin_total = total.value();
  return report;
}

/// Information loss of the detectability quadratic form for a parameter
/// perturbation, via all three routes.
template <typename Scalar>
LossReport<Scalar> loss_quadform(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                                 ConstVectorArg<Scalar> delta_theta, const BinningScheme<Scalar>& scheme,
                                 const NodeRule<Scalar>& rule) {
  detail::check_theta_dim(model, theta);
  if (delta_theta.size() != model.param_dim())
    throw std::invalid_argument("delta_theta length must match model parameter dimension");
  if (delta_theta.isZero(0)) throw DomainError("zero perturbation");
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");

  const VectorX<Scalar> means = sample_mean(model, theta, rule);
  const MatrixX<Scalar> grads = sample_grad(model, theta, rule);
  const VectorX<Scalar> gamma = grads.transpose() * delta_theta;
  return loss_from_samples(rule, means, gamma, VectorX<Scalar>(delta_theta));
}

/// The FIM difference assembled per bin (each bin contributes a PSD term),
/// algebraically equal to fim_list_mode - fim_binned on the same rule.
template <typename Scalar>
MatrixX<Scalar> fim_difference(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                               const BinningScheme<Scalar>& scheme, const NodeRule<Scalar>& rule) {
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");
  const VectorX<Scalar> means = sample_mean(model, theta, rule);
  const MatrixX<Scalar> grads = sample_grad(model, theta, rule);
  VectorX<Scalar> bin_mean = integrate_per_bin(rule, means);
  for (Index m = 0; m < bin_mean.size(); ++m)
    if (!(bin_mean[m] > 0)) throw DomainError("empty bin mean in bin " + std::to_string(m));
  MatrixX<Scalar> bin_grad(model.param_dim(), rule.bin_count());
  for (Index k = 0; k < model.param_dim(); ++k)
    bin_grad.row(k) = integrate_per_bin(rule, grads.row(k).transpose()).transpose();

  const Index p = model.param_dim();
  MatrixX<Scalar> diff = MatrixX<Scalar>::Zero(p, p);
  for (Index i = 0; i < rule.node_count(); ++i) {
    const Scalar w = rule.weights()[i] / means[i];
    diff.template selfadjointView<Eigen::Lower>().rankUpdate(grads.col(i), w);
  }
  for (Index m = 0; m < rule.bin_count(); ++m)
    diff.template selfadjointView<Eigen::Lower>().rankUpdate(bin_grad.col(m), Scalar(-1) / bin_mean[m]);
  return MatrixX<Scalar>(diff.template selfadjointView<Eigen::Lower>());
}

/// Expected loss of the detectability quadratic form when the perturbation is
/// random with covariance K: tr(K (F_LM - F_B)).
template <typename Scalar, typename DerivedK>
Scalar average_loss_trace(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                          const BinningScheme<Scalar>& scheme, const NodeRule<Scalar>& rule,
                          const Eigen::MatrixBase<DerivedK>& covariance_expr) {
  const MatrixX<Scalar> covariance = covariance_expr;
  const Index p = model.param_dim();
  if (covariance.rows() != p || covariance.cols() != p)
    throw std::invalid_argument("covariance must be p x p");
  const Scalar mag = std::max<Scalar>(covariance.cwiseAbs().maxCoeff(), 1);
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * mag)
    throw DomainError("covariance not symmetric PSD");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(covariance, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -Scalar(1e-10) * mag)
    throw DomainError("covariance not symmetric PSD");
  return (covariance * fim_difference(model, theta, scheme, rule)).trace();
}

/// AUC of the ideal observer at separability d.
template <typename Scalar>
Detectability<Scalar> auc_from_detectability(Scalar d) {
  if (!(d >= 0)) throw DomainError("negative detectability");
  Detectability<Scalar> out;
  out.d = d;
  out.d_squared = d * d;
  out.auc = Scalar(0.5) + Scalar(0.5) * std::erf(d / 2);
  return out;
}

/// Lowest-order detectability of a parameter change: d^2 is the FIM quadratic
/// form in the perturbation direction.
template <typename DerivedF, typename Scalar = typename DerivedF::Scalar>
Detectability<Scalar> detectability_from_fim(const Eigen::MatrixBase<DerivedF>& fim_expr,
                                             ConstVectorArg<Scalar> delta_theta) {
  const Fim<Scalar> fim = fim_expr;
  if (fim.rows() != fim.cols() || fim.rows() != delta_theta.size())
    throw std::invalid_argument("FIM and perturbation dimensions disagree");
  if (delta_theta.isZero(0)) throw DomainError("zero perturbation");
  Scalar d2 = delta_theta.dot(fim * delta_theta);
  const Scalar floor = Scalar(1e-12) * std::max<Scalar>(std::abs(fim.trace()), 1) *
                       delta_theta.squaredNorm();
  if (d2 < 0) {
    if (d2 < -floor) throw DomainError("negative detectability");
    d2 = 0;  // PSD quadratic form, roundoff only
  }
  Detectability<Scalar> out = auc_from_detectability(std::sqrt(d2));
  out.d_squared = d2;
  return out;
}

/// Detectability pair (list-mode and binned) straight from quadratic forms.
template <typename Scalar>
Detectability<Scalar> detectability_from_quadform(Scalar quadform) {
  if (quadform < 0) {
    if (quadform < Scalar(-1e-14)) throw DomainError("negative detectability");
    quadform = 0;
  }
  Detectability<Scalar> out = auc_from_detectability(std::sqrt(quadform));
  out.d_squared = quadform;
  return out;
}

}  // namespace binfim
