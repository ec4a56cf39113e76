#pragma once

#include <binfim/binning_scheme.hpp>

#include <cmath>
#include <utility>

namespace binfim {
namespace detail {

/// Gauss-Legendre nodes (ascending) and weights on [-1, 1], by Newton
/// iteration on the Legendre recurrence.
template <typename Scalar>
void gauss_legendre(int n, VectorX<Scalar>& nodes, VectorX<Scalar>& weights) {
  nodes.resize(n);
  weights.resize(n);
  const Scalar pi = Scalar(3.14159265358979323846L);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Scalar p0 = 1, p1 = 0;  // P_k(x), P_{k-1}(x)
      for (int k = 0; k < n; ++k) {
        const Scalar p2 = p1;
        p1 = p0;
        p0 = ((2 * k + 1) * x * p1 - k * p2) / Scalar(k + 1);
      }
      dp = Scalar(n) * (x * p0 - p1) / (x * x - 1);
      const Scalar dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < Scalar(1e-16)) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

}  // namespace detail

/// Per-bin tensor-product Gauss-Legendre rule: the discrete carrier of every
/// integral over the attribute space. Nodes are placed per bin cell, so no
/// node ever straddles a bin boundary and partition identities hold exactly
/// at the quadrature level.
template <typename Scalar>
class NodeRule {
 public:
  NodeRule(MatrixX<Scalar> nodes, VectorX<Scalar> weights, Eigen::VectorXi bin_of_node,
           Index bin_count, int nodes_per_axis)
      : nodes_(std::move(nodes)),
        weights_(std::move(weights)),
        bin_of_node_(std::move(bin_of_node)),
        bin_count_(bin_count),
        nodes_per_axis_(nodes_per_axis) {}

  Index node_count() const { return nodes_.cols(); }
  Index dim() const { return nodes_.rows(); }
  Index bin_count() const { return bin_count_; }
  int nodes_per_axis() const { return nodes_per_axis_; }

  /// q x N matrix, one column per node.
  const MatrixX<Scalar>& nodes() const { return nodes_; }
  auto node(Index i) const { return nodes_.col(i); }
  const VectorX<Scalar>& weights() const { return weights_; }
  const Eigen::VectorXi& bin_of_node() const { return bin_of_node_; }

 private:
  MatrixX<Scalar> nodes_;
  VectorX<Scalar> weights_;
  Eigen::VectorXi bin_of_node_;
  Index bin_count_;
  int nodes_per_axis_;
};

/// Builds the per-bin tensor rule. Validates that the scheme partitions the
/// space: cell volumes must add up to the space volume, and cells of explicit
/// (non-grid) schemes must not overlap.
template <typename Scalar>
NodeRule<Scalar> build_rule(const AttributeSpace<Scalar>& space, const BinningScheme<Scalar>& scheme,
                            int nodes_per_axis) {
  if (nodes_per_axis < 1) throw std::invalid_argument("nodes_per_axis must be >= 1");
  if (!scheme.space().same_box(space))
    throw DomainError("scheme does not partition space: scheme was built for a different box");

  detail::KahanSum<Scalar> vol;
  for (Index m = 0; m < scheme.bin_count(); ++m) vol.add(scheme.cell(m).volume());
  if (std::abs(vol.value() - space.volume()) > Scalar(1e-12) * space.volume())
    throw DomainError("scheme does not partition space: cell volumes do not sum to the space volume");

  if (!scheme.is_uniform_grid()) {
    const Scalar tol = Scalar(1e-12) * space.volume();
    for (Index m = 0; m < scheme.bin_count(); ++m)
      for (Index k = m + 1; k < scheme.bin_count(); ++k) {
        Scalar overlap = 1;
        for (Index d = 0; d < space.dim(); ++d) {
          const Scalar lo = std::max(scheme.cell(m).lower[d], scheme.cell(k).lower[d]);
          const Scalar hi = std::min(scheme.cell(m).upper[d], scheme.cell(k).upper[d]);
          overlap *= std::max<Scalar>(hi - lo, 0);
        }
        if (overlap > tol)
          throw DomainError("scheme does not partition space: cells overlap");
      }
  }

  const Index q = space.dim();
  const int n = nodes_per_axis;
  VectorX<Scalar> ref_nodes, ref_weights;
  detail::gauss_legendre<Scalar>(n, ref_nodes, ref_weights);

  Index per_bin = 1;
  for (Index d = 0; d < q; ++d) per_bin *= n;
  const Index total = scheme.bin_count() * per_bin;

  MatrixX<Scalar> nodes(q, total);
  VectorX<Scalar> weights(total);
  Eigen::VectorXi bin_of_node(total);

  Index out = 0;
  Eigen::VectorXi idx(q);
  for (Index m = 0; m < scheme.bin_count(); ++m) {
    const auto& c = scheme.cell(m);
    idx.setZero();
    for (Index j = 0; j < per_bin; ++j) {
      Scalar w = 1;
      for (Index d = 0; d < q; ++d) {
        const Scalar half = (c.upper[d] - c.lower[d]) / 2;
        const Scalar mid = (c.upper[d] + c.lower[d]) / 2;
        nodes(d, out) = mid + half * ref_nodes[idx[d]];
        w *= half * ref_weights[idx[d]];
      }
      weights[out] = w;
      bin_of_node[out] = static_cast<int>(m);
      ++out;
      for (Index d = q - 1; d >= 0; --d) {
        if (++idx[d] < n) break;
        idx[d] = 0;
      }
    }
  }
  return NodeRule<Scalar>(std::move(nodes), std::move(weights), std::move(bin_of_node),
                          scheme.bin_count(), n);
}

/// Weighted sum of per-node values over the whole space.
template <typename Scalar, typename Derived>
Scalar integrate(const NodeRule<Scalar>& rule, const Eigen::MatrixBase<Derived>& values) {
  static_assert(std::is_same_v<typename Derived::Scalar, Scalar>,
                "value scalar type must match the rule");
  if (values.size() != rule.node_count())
    throw std::invalid_argument("values length must match rule node count");
  detail::KahanSum<Scalar> acc;
  for (Index i = 0; i < rule.node_count(); ++i) acc.add(rule.weights()[i] * values(i));
  return acc.value();
}

/// Per-bin weighted sums; component m collects exactly the nodes of bin m,
/// so the components add up to integrate() over the partition.
template <typename Scalar, typename Derived>
VectorX<Scalar> integrate_per_bin(const NodeRule<Scalar>& rule,
                                  const Eigen::MatrixBase<Derived>& values) {
  static_assert(std::is_same_v<typename Derived::Scalar, Scalar>,
                "value scalar type must match the rule");
  if (values.size() != rule.node_count())
    throw std::invalid_argument("values length must match rule node count");
  VectorX<Scalar> sums = VectorX<Scalar>::Zero(rule.bin_count());
  VectorX<Scalar> comps = VectorX<Scalar>::Zero(rule.bin_count());
  for (Index i = 0; i < rule.node_count(); ++i) {
    const Index m = rule.bin_of_node()[i];
    const Scalar x = rule.weights()[i] * values(i);
    const Scalar y = x - comps[m];
    const Scalar t = sums[m] + y;
    comps[m] = (t - sums[m]) - y;
    sums[m] = t;
  }
  return sums;
}

}  // namespace binfim
