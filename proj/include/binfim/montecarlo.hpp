#pragma once

#include <binfim/binning.hpp>

#include <cmath>
#include <locale>
#include <ostream>
#include <utility>

namespace binfim {

/// One realization of the event-list point process: a list of attribute
/// vectors (one column per event) plus the inputs that produced it.
template <typename Scalar>
struct EventList {
  MatrixX<Scalar> events;  // q x N
  std::uint64_t seed = 0;
  VectorX<Scalar> theta;

  Index size() const { return events.cols(); }
  Index dim() const { return events.rows(); }
};

namespace detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  /// Uniform double in [0, 1), fully determined by the seed.
  double uniform() { return double(splitmix64(state_) >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Poisson count via exponential interarrival accumulation; exact for any
/// mean without underflow.
inline Index poisson_count(Rng& rng, double mean) {
  Index n = 0;
  double t = -std::log1p(-rng.uniform());
  while (t <= mean) {
    ++n;
    t += -std::log1p(-rng.uniform());
  }
  return n;
}

}  // namespace detail

/// Samples an event list: a Poisson count with the model's total mean, then
/// i.i.d. events by rejection from a uniform proposal over the box, with
/// envelope 1.2x the largest node value of the mean density. A proposal
/// whose density exceeds the envelope aborts the draw: it means the rule is
/// too coarse to bound the model.
template <typename Scalar>
EventList<Scalar> sample_list(const ParametricModel<Scalar>& model, ConstVectorArg<Scalar> theta,
                              const NodeRule<Scalar>& rule, std::uint64_t seed) {
  const VectorX<Scalar> node_means = sample_mean(model, theta, rule);
  const Scalar nbar = integrate(rule, node_means);
  if (!(nbar > 0)) throw DomainError("nonpositive mean density: total mean is not positive");
  const Scalar envelope = Scalar(1.2) * node_means.maxCoeff();

  detail::Rng rng(seed);
  const Index n_events = detail::poisson_count(rng, double(nbar));

  const auto& space = model.space();
  EventList<Scalar> list;
  list.seed = seed;
  list.theta = theta;
  list.events.resize(space.dim(), n_events);

  VectorX<Scalar> a(space.dim());
  for (Index n = 0; n < n_events;) {
    for (Index d = 0; d < space.dim(); ++d)
      a[d] = space.lower()[d] + Scalar(rng.uniform()) * (space.upper()[d] - space.lower()[d]);
    const Scalar v = model.mean_raw(a, theta);
    if (!(v > 0)) detail::throw_nonpositive<Scalar>(a, v);
    if (v > envelope)
      throw DomainError("envelope exceeded: mean density at a proposal is above the node-grid bound; refine the rule");
    if (Scalar(rng.uniform()) * envelope < v) {
      list.events.col(n) = a;
      ++n;
    }
  }
  return list;
}

/// Per-bin event counts; components add up to the list length.
template <typename Scalar>
Eigen::VectorXi bin_counts(const EventList<Scalar>& list, const BinningScheme<Scalar>& scheme) {
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(scheme.bin_count());
  for (Index n = 0; n < list.size(); ++n) ++counts[bin_index<Scalar>(scheme, list.events.col(n))];
  return counts;
}

template <typename Scalar>
struct MeanCheckReport {
  VectorX<Scalar> expected_means;
  VectorX<Scalar> sample_means;
  VectorX<Scalar> z_scores;
  Scalar max_abs_z = 0;
  Index n_trials = 0;
};

/// Compares empirical bin means over repeated trials against the expected
/// bin means computed from `theta_check` (usually equal to the sampling
/// theta; pass something else as a negative control).
template <typename Scalar>
MeanCheckReport<Scalar> empirical_mean_check(const ParametricModel<Scalar>& model,
                                             ConstVectorArg<Scalar> theta_sample,
                                             ConstVectorArg<Scalar> theta_check,
                                             const BinningScheme<Scalar>& scheme,
                                             const NodeRule<Scalar>& rule, Index n_trials,
                                             std::uint64_t seed) {
  if (n_trials < 30) throw std::invalid_argument("empirical_mean_check requires n_trials >= 30");
  MeanCheckReport<Scalar> report;
  report.n_trials = n_trials;
  report.expected_means = bin_means(model, theta_check, scheme, rule);

  VectorX<Scalar> totals = VectorX<Scalar>::Zero(scheme.bin_count());
  for (Index t = 0; t < n_trials; ++t) {
    std::uint64_t state = seed;
    state ^= 0x9e3779b97f4a7c15ull * (std::uint64_t(t) + 1);
    const std::uint64_t trial_seed = detail::splitmix64(state);
    const EventList<Scalar> list = sample_list(model, theta_sample, rule, trial_seed);
    totals += bin_counts(list, scheme).template cast<Scalar>();
  }
  report.sample_means = totals / Scalar(n_trials);
  report.z_scores = (report.sample_means - report.expected_means).array() /
                    (report.expected_means / Scalar(n_trials)).array().sqrt();
  report.max_abs_z = report.z_scores.cwiseAbs().maxCoeff();
  return report;
}

template <typename Scalar>
MeanCheckReport<Scalar> empirical_mean_check(const ParametricModel<Scalar>& model,
                                             ConstVectorArg<Scalar> theta,
                                             const BinningScheme<Scalar>& scheme,
                                             const NodeRule<Scalar>& rule, Index n_trials,
                                             std::uint64_t seed) {
  return empirical_mean_check(model, theta, theta, scheme, rule, n_trials, seed);
}

/// Plain-text export: one event per line, q space-separated coordinates.
template <typename Scalar>
void write_events_text(const EventList<Scalar>& list, std::ostream& os) {
  os.imbue(std::locale::classic());
  os.precision(17);
  for (Index n = 0; n < list.size(); ++n) {
    for (Index d = 0; d < list.dim(); ++d) {
      if (d) os << ' ';
      os << list.events(d, n);
    }
    os << '\n';
  }
}

}  // namespace binfim
