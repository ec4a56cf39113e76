#pragma once

#include <binfim/attribute_space.hpp>

#include <random>
#include <utility>
#include <vector>

namespace binfim {

/// Measurable partition of the attribute space into M axis-aligned cells.
/// Cells are half-open ([lower, upper) per axis) except at the upper boundary
/// of the space, where they are closed; that fixes bin ownership of
/// measure-zero boundary points deterministically.
template <typename Scalar>
class BinningScheme {
 public:
  struct Cell {
    VectorX<Scalar> lower;
    VectorX<Scalar> upper;
    Scalar volume() const { return (upper - lower).prod(); }
  };

  /// Explicit cell list. Cells are validated for shape only; whether they
  /// actually partition the space is checked by build_rule / verify_partition.
  BinningScheme(AttributeSpace<Scalar> space, std::vector<Cell> cells)
      : space_(std::move(space)), cells_(std::move(cells)) {
    if (cells_.empty()) throw std::invalid_argument("binning scheme requires at least one cell");
    for (const Cell& c : cells_) {
      if (c.lower.size() != space_.dim() || c.upper.size() != space_.dim())
        throw std::invalid_argument("binning cell dimension must match attribute space");
      for (Index d = 0; d < space_.dim(); ++d)
        if (!(c.upper[d] > c.lower[d]))
          throw std::invalid_argument("binning cell requires upper > lower on every axis");
    }
  }

  /// Uniform grid with counts_per_axis[d] cells along axis d. Cell order is
  /// row-major with the last axis fastest; 1D cell centers sit at
  /// lower + (m + 1/2) * extent / M.
  BinningScheme(AttributeSpace<Scalar> space, Eigen::VectorXi counts_per_axis)
      : space_(std::move(space)), grid_counts_(std::move(counts_per_axis)) {
    if (grid_counts_.size() != space_.dim())
      throw std::invalid_argument("grid counts dimension must match attribute space");
    if ((grid_counts_.array() < 1).any())
      throw std::invalid_argument("grid counts must all be >= 1");
    const Index q = space_.dim();
    Index m_total = 1;
    for (Index d = 0; d < q; ++d) m_total *= grid_counts_[d];
    cells_.reserve(static_cast<std::size_t>(m_total));
    Eigen::VectorXi idx = Eigen::VectorXi::Zero(q);
    for (Index m = 0; m < m_total; ++m) {
      Cell c;
      c.lower.resize(q);
      c.upper.resize(q);
      for (Index d = 0; d < q; ++d) {
        const Scalar step = (space_.upper()[d] - space_.lower()[d]) / Scalar(grid_counts_[d]);
        c.lower[d] = (idx[d] == 0) ? space_.lower()[d] : space_.lower()[d] + Scalar(idx[d]) * step;
        c.upper[d] = (idx[d] + 1 == grid_counts_[d]) ? space_.upper()[d]
                                                     : space_.lower()[d] + Scalar(idx[d] + 1) * step;
      }
      cells_.push_back(std::move(c));
      // advance multi-index, last axis fastest
      for (Index d = q - 1; d >= 0; --d) {
        if (++idx[d] < grid_counts_[d]) break;
        idx[d] = 0;
      }
    }
  }

  const AttributeSpace<Scalar>& space() const { return space_; }
  Index bin_count() const { return static_cast<Index>(cells_.size()); }
  const Cell& cell(Index m) const { return cells_.at(static_cast<std::size_t>(m)); }
  const std::vector<Cell>& cells() const { return cells_; }

  bool is_uniform_grid() const { return grid_counts_.size() > 0; }
  const Eigen::VectorXi& grid_counts() const { return grid_counts_; }

 private:
  AttributeSpace<Scalar> space_;
  std::vector<Cell> cells_;
  Eigen::VectorXi grid_counts_;  // empty for explicit cell lists
};

template <typename Scalar>
BinningScheme<Scalar> uniform_grid(const AttributeSpace<Scalar>& space,
                                   const Eigen::VectorXi& counts_per_axis) {
  return BinningScheme<Scalar>(space, counts_per_axis);
}

/// 1D convenience overload.
template <typename Scalar>
BinningScheme<Scalar> uniform_grid(const AttributeSpace<Scalar>& space, int count) {
  Eigen::VectorXi counts = Eigen::VectorXi::Constant(space.dim(), count);
  return BinningScheme<Scalar>(space, counts);
}

namespace detail {

/// Cell ownership under the half-open convention, closed at the space's
/// upper boundary.
template <typename Scalar>
bool cell_owns(const typename BinningScheme<Scalar>::Cell& cell,
               const AttributeSpace<Scalar>& space, ConstVectorRef<Scalar> a) {
  for (Index d = 0; d < a.size(); ++d) {
    if (a[d] < cell.lower[d] || a[d] > cell.upper[d]) return false;
    if (a[d] == cell.upper[d] && cell.upper[d] != space.upper()[d]) return false;
  }
  return true;
}

}  // namespace detail

/// Index of the unique bin owning `a`. Boundary points resolve per the
/// half-open convention (lowest owning index for explicit cell lists).
template <typename Scalar>
Index bin_index(const BinningScheme<Scalar>& scheme, ConstVectorArg<Scalar> a) {
  if (!scheme.space().contains(a)) throw DomainError("point outside attribute space");
  if (scheme.is_uniform_grid()) {
    const auto& space = scheme.space();
    Index flat = 0;
    for (Index d = 0; d < space.dim(); ++d) {
      const int n = scheme.grid_counts()[d];
      const Scalar step = (space.upper()[d] - space.lower()[d]) / Scalar(n);
      Index i = static_cast<Index>(std::floor((a[d] - space.lower()[d]) / step));
      if (i < 0) i = 0;
      if (i >= n) i = n - 1;  // space's upper boundary belongs to the last cell
      flat = flat * n + i;
    }
    return flat;
  }
  for (Index m = 0; m < scheme.bin_count(); ++m)
    if (detail::cell_owns<Scalar>(scheme.cell(m), scheme.space(), a)) return m;
  throw DomainError("scheme does not partition space: no cell owns the queried point");
}

template <typename Scalar>
struct PartitionReport {
  struct Violation {
    VectorX<Scalar> point;
    Index owning_cells;  // != 1
  };
  bool pass = false;
  Scalar volume_relative_error = 0;
  Index samples_checked = 0;
  std::vector<Violation> violations;  // capped at 16
};

/// Samples the space and checks that every point lands in exactly one cell
/// and that cell volumes add up to the space volume.
template <typename Scalar>
PartitionReport<Scalar> verify_partition(const BinningScheme<Scalar>& scheme, Index n_samples,
                                         std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("verify_partition requires n_samples >= 1");
  PartitionReport<Scalar> report;
  report.samples_checked = n_samples;

  detail::KahanSum<Scalar> vol;
  for (Index m = 0; m < scheme.bin_count(); ++m) vol.add(scheme.cell(m).volume());
  report.volume_relative_error = std::abs(vol.value() - scheme.space().volume()) / scheme.space().volume();

  std::uint64_t state = seed;
  const auto& space = scheme.space();
  VectorX<Scalar> a(space.dim());
  for (Index s = 0; s < n_samples; ++s) {
    for (Index d = 0; d < space.dim(); ++d) {
      const Scalar u = Scalar(detail::splitmix64(state) >> 11) * Scalar(0x1.0p-53);
      a[d] = space.lower()[d] + u * (space.upper()[d] - space.lower()[d]);
    }
    Index owners = 0;
    for (Index m = 0; m < scheme.bin_count(); ++m) {
      const auto& c = scheme.cell(m);
      bool inside = true;
      for (Index d = 0; d < space.dim(); ++d)
        if (a[d] < c.lower[d] || a[d] > c.upper[d]) {
          inside = false;
          break;
        }
      if (inside) ++owners;
    }
    if (owners != 1 && report.violations.size() < 16)
      report.violations.push_back({a, owners});
  }
  report.pass = report.violations.empty() && report.volume_relative_error <= Scalar(1e-12);
  return report;
}

}  // namespace binfim
