#pragma once

#include <binfim/model.hpp>

#include <utility>

namespace binfim {

/// The binning operator: per-bin integrals of a function sampled at the
/// rule's nodes.
template <typename Scalar, typename Derived>
VectorX<Scalar> apply_binning(const BinningScheme<Scalar>& scheme, const NodeRule<Scalar>& rule,
                              const Eigen::MatrixBase<Derived>& gamma) {
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");
  return integrate_per_bin(rule, gamma);
}

/// Ordinary Hilbert-space adjoint of the binning operator: the piecewise
/// constant extension of a binned vector, sampled at the rule's nodes.
template <typename Scalar, typename Derived>
VectorX<Scalar> apply_binning_adjoint(const BinningScheme<Scalar>& scheme,
                                      const Eigen::MatrixBase<Derived>& binned,
                                      const NodeRule<Scalar>& rule) {
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");
  if (binned.size() != scheme.bin_count())
    throw std::invalid_argument("binned vector length must match bin count");
  VectorX<Scalar> values(rule.node_count());
  for (Index i = 0; i < rule.node_count(); ++i) values[i] = binned(rule.bin_of_node()[i]);
  return values;
}

/// Expected per-bin counts; strictly positive components by contract.
template <typename Scalar>
VectorX<Scalar> bin_means(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                          const BinningScheme<Scalar>& scheme, const NodeRule<Scalar>& rule) {
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");
  VectorX<Scalar> means = integrate_per_bin(rule, sample_mean(model, theta, rule));
  for (Index m = 0; m < means.size(); ++m)
    if (!(means[m] > 0)) throw DomainError("empty bin mean in bin " + std::to_string(m));
  return means;
}

/// Inner product weighted by the reciprocal mean density: the geometry in
/// which the binning pseudoinverse takes its simple diagonal form.
template <typename Scalar, typename DerivedA, typename DerivedB, typename DerivedM>
Scalar weighted_dot(const NodeRule<Scalar>& rule, const Eigen::MatrixBase<DerivedA>& f,
                    const Eigen::MatrixBase<DerivedB>& g,
                    const Eigen::MatrixBase<DerivedM>& mean_values) {
  if (f.size() != rule.node_count() || g.size() != rule.node_count() ||
      mean_values.size() != rule.node_count())
    throw std::invalid_argument("node function length must match rule node count");
  detail::KahanSum<Scalar> acc;
  for (Index i = 0; i < rule.node_count(); ++i)
    acc.add(rule.weights()[i] * f(i) * g(i) / mean_values(i));
  return acc.value();
}

template <typename Scalar, typename DerivedA, typename DerivedM>
Scalar weighted_norm_sq(const NodeRule<Scalar>& rule, const Eigen::MatrixBase<DerivedA>& f,
                        const Eigen::MatrixBase<DerivedM>& mean_values) {
  return weighted_dot<Scalar>(rule, f, f, mean_values);
}

namespace detail {

/// Core of the orthogonal decomposition with the mean density given as node
/// values: gamma1 = mean * (B gamma)_m / mean_m on each bin, gamma0 the rest.
/// gamma1 is the weighted-space projection of gamma onto the range of the
/// binning adjoint; B gamma0 vanishes identically at the quadrature level.
template <typename Scalar, typename Derived>
std::pair<VectorX<Scalar>, VectorX<Scalar>> project_with_means(
    const Eigen::MatrixBase<Derived>& gamma, const VectorX<Scalar>& mean_values,
    const NodeRule<Scalar>& rule) {
  if (gamma.size() != rule.node_count())
    throw std::invalid_argument("node function length must match rule node count");
  const VectorX<Scalar> bin_gamma = integrate_per_bin(rule, gamma);
  const VectorX<Scalar> bin_mean = integrate_per_bin(rule, mean_values);
  for (Index m = 0; m < bin_mean.size(); ++m)
    if (!(bin_mean[m] > 0)) throw DomainError("empty bin mean in bin " + std::to_string(m));
  const VectorX<Scalar> coef = bin_gamma.cwiseQuotient(bin_mean);
  VectorX<Scalar> gamma1(rule.node_count());
  for (Index i = 0; i < rule.node_count(); ++i)
    gamma1[i] = mean_values[i] * coef[rule.bin_of_node()[i]];
  VectorX<Scalar> gamma0 = gamma.derived() - gamma1;
  return {std::move(gamma1), std::move(gamma0)};
}

}  // namespace detail

/// Splits a node function into its binned component and the null component
/// annihilated by the binning operator, orthogonal in the weighted inner
/// product at theta.
template <typename Scalar, typename Derived>
std::pair<VectorX<Scalar>, VectorX<Scalar>> project_component(
    const Eigen::MatrixBase<Derived>& gamma, const ParametricModel<Scalar>& model,
    ConstVectorArg<Scalar> theta, const BinningScheme<Scalar>& scheme, const NodeRule<Scalar>& rule) {
  if (rule.bin_count() != scheme.bin_count())
    throw std::invalid_argument("rule and scheme disagree on bin count");
  const VectorX<Scalar> means = sample_mean(model, theta, rule);
  return detail::project_with_means<Scalar>(gamma, means, rule);
}

}  // namespace binfim
