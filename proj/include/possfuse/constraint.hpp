#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "possfuse/bound_fn.hpp"
#include "possfuse/common.hpp"
#include "possfuse/state_space.hpp"

namespace possfuse {

struct Component {
  double weight;
  BoundFn fn;
};

/// Finite weighted mixture of bound functions. The induced set function
/// A -> sum_i a_i * sup_A f_i is an outer measure; when every component has
/// unit sup norm and the weights sum to one the mixture is canonical.
class Constraint {
 public:
  Constraint(StateSpace space, std::vector<Component> components)
      : space_(std::move(space)), components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("constraint needs at least one component");
    for (const auto& c : components_) {
      if (!(c.weight >= 0.0) || !std::isfinite(c.weight))
        throw std::invalid_argument("component weights must be finite and non-negative");
      if (c.fn.space() != space_) throw SpaceMismatch("component lives on a different space");
    }
  }

  /// Single-component constraint delta_f.
  static Constraint single(BoundFn f, double weight = 1.0) {
    StateSpace space = f.space();
    std::vector<Component> comps;
    comps.push_back({weight, std::move(f)});
    return Constraint(std::move(space), std::move(comps));
  }

  const StateSpace& space() const { return space_; }
  const std::vector<Component>& components() const { return components_; }

  bool is_canonical(double tol = kDefaultTolerance) const {
    double total = 0.0;
    for (const auto& c : components_) {
      if (std::abs(sup_norm(c.fn) - 1.0) > tol) return false;
      total += c.weight;
    }
    return std::abs(total - 1.0) <= tol;
  }

 private:
  StateSpace space_;
  std::vector<Component> components_;
};

/// Probability mass function on a finite space.
class DiscreteProbability {
 public:
  DiscreteProbability(StateSpace space, std::vector<double> weights,
                      double tol = kDefaultTolerance)
      : space_(std::move(space)), weights_(std::move(weights)) {
    if (weights_.size() != space_.size())
      throw std::invalid_argument("probability vector length must equal space size");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw std::invalid_argument("probabilities must be finite and non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > tol)
      throw std::invalid_argument("probabilities must sum to one");
  }

  static DiscreteProbability uniform(StateSpace space) {
    const std::size_t n = space.size();
    return DiscreteProbability(std::move(space),
                               std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  const StateSpace& space() const { return space_; }
  const std::vector<double>& weights() const { return weights_; }

  double probability_of(const SubsetMask& a) const {
    if (a.space() != space_) throw SpaceMismatch("mask lives on a different space");
    double total = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i)
      if (a.contains(i)) total += weights_[i];
    return total;
  }

 private:
  StateSpace space_;
  std::vector<double> weights_;
};

struct FocalSet {
  SubsetMask subset;
  double mass;
};

/// Basic mass assignment: non-empty focal subsets with positive masses
/// summing to one.
class MassFunction {
 public:
  MassFunction(StateSpace space, std::vector<FocalSet> focal, double tol = kDefaultTolerance)
      : space_(std::move(space)), focal_(std::move(focal)) {
    if (focal_.empty()) throw std::invalid_argument("mass function needs at least one focal set");
    double total = 0.0;
    for (const auto& f : focal_) {
      if (f.subset.space() != space_) throw SpaceMismatch("focal set lives on a different space");
      if (f.subset.is_empty()) throw std::invalid_argument("focal sets must be non-empty");
      if (!(f.mass > 0.0) || !std::isfinite(f.mass))
        throw std::invalid_argument("focal masses must be finite and positive");
      total += f.mass;
    }
    if (std::abs(total - 1.0) > tol) throw std::invalid_argument("focal masses must sum to one");
    for (std::size_t i = 0; i < focal_.size(); ++i)
      for (std::size_t j = i + 1; j < focal_.size(); ++j)
        if (focal_[i].subset == focal_[j].subset)
          throw std::invalid_argument("focal sets must be pairwise distinct");
  }

  const StateSpace& space() const { return space_; }
  const std::vector<FocalSet>& focal() const { return focal_; }

 private:
  StateSpace space_;
  std::vector<FocalSet> focal_;
};

namespace detail {

struct CompView {
  double weight;
  BoundFn fn;
  std::vector<double> values;
};

inline bool values_equal(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

// Merge duplicate functions by weight addition, prune negligible weights and
// impose the canonical order: descending weight, ties by lexicographic values.
inline std::vector<Component> tidy_components(std::vector<Component> comps, double tol) {
  std::vector<CompView> views;
  views.reserve(comps.size());
  for (auto& c : comps) views.push_back({c.weight, std::move(c.fn), {}});
  for (auto& v : views) v.values = v.fn.to_values();

  std::sort(views.begin(), views.end(),
            [](const CompView& a, const CompView& b) { return a.values < b.values; });
  std::vector<CompView> merged;
  for (auto& v : views) {
    if (!merged.empty() && values_equal(merged.back().values, v.values, tol))
      merged.back().weight += v.weight;
    else
      merged.push_back(std::move(v));
  }
  std::erase_if(merged, [](const CompView& v) { return v.weight < kPruneThreshold; });
  std::sort(merged.begin(), merged.end(), [](const CompView& a, const CompView& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.values < b.values;
  });

  std::vector<Component> out;
  out.reserve(merged.size());
  for (auto& v : merged) out.push_back({v.weight, std::move(v.fn)});
  return out;
}

}  // namespace detail

/// Outer measure of A induced by M: sum_i a_i * sup_A f_i.
inline double outer_measure(const Constraint& m, const SubsetMask& a) {
  if (m.space() != a.space()) throw SpaceMismatch("mask lives on a different space");
  double total = 0.0;
  for (const auto& c : m.components()) total += c.weight * sup_over(c.fn, a);
  return total;
}

/// Lower bound induced on A by the outer measure of the complement;
/// `total` is the dominated measure's total mass (1 for probabilities).
inline double lower_bound(const Constraint& m, const SubsetMask& a, double total = 1.0) {
  return std::max(0.0, total - outer_measure(m, a.complement()));
}

/// Mixture norm: sum_i a_i * ||f_i||.
inline double norm(const Constraint& m) {
  double total = 0.0;
  for (const auto& c : m.components()) total += c.weight * sup_norm(c.fn);
  return total;
}

/// Rescales every component to unit sup norm, moving the norm into the
/// weight: (a_i, f_i) -> (a_i * ||f_i||, f_i / ||f_i||). Norm-preserving and
/// idempotent; duplicates merge, negligible weights are pruned.
inline Constraint canonicalize(const Constraint& m, double tol = kDefaultTolerance) {
  std::vector<Component> out;
  out.reserve(m.components().size());
  for (const auto& c : m.components()) {
    const double s = sup_norm(c.fn);
    const double w = c.weight * s;
    if (w < kPruneThreshold) continue;
    out.push_back({w, normalize(c.fn, tol)});
  }
  if (out.empty()) throw ZeroConstraint("canonicalization pruned every component");
  return Constraint(m.space(), detail::tidy_components(std::move(out), tol));
}

/// Joint constraint of independently constrained variables: all pairwise
/// tensor products with multiplied weights.
inline Constraint independent_product(const Constraint& m, const Constraint& mp) {
  std::vector<Component> out;
  out.reserve(m.components().size() * mp.components().size());
  for (const auto& a : m.components())
    for (const auto& b : mp.components())
      out.push_back({a.weight * b.weight, tensor_product(a.fn, b.fn)});
  StateSpace prod = out.front().fn.space();
  return Constraint(std::move(prod), std::move(out));
}

/// Exhaustively checks that p(B) <= mu_M(B) for every subset B, with
/// equality on the full space. Guarded to spaces of at most 20 points.
inline bool dominates(const Constraint& m, const DiscreteProbability& p,
                      double tol = kDefaultTolerance) {
  if (m.space() != p.space()) throw SpaceMismatch("constraint and probability spaces differ");
  const std::size_t n = m.space().size();
  if (n > 20)
    throw std::invalid_argument(
        "exhaustive domination check is limited to 20 points; use dominates_sampled");

  std::vector<std::vector<double>> tables;
  std::vector<double> weights;
  for (const auto& c : m.components()) {
    tables.push_back(c.fn.to_values());
    weights.push_back(c.weight);
  }
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t bits = 0; bits <= full; ++bits) {
    double mu = 0.0;
    for (std::size_t k = 0; k < tables.size(); ++k) {
      double s = 0.0;
      for (std::uint64_t rest = bits; rest; rest &= rest - 1)
        s = std::max(s, tables[k][static_cast<std::size_t>(std::countr_zero(rest))]);
      mu += weights[k] * s;
    }
    double pb = 0.0;
    for (std::uint64_t rest = bits; rest; rest &= rest - 1)
      pb += p.weights()[static_cast<std::size_t>(std::countr_zero(rest))];
    if (bits == full) {
      if (std::abs(pb - mu) > tol) return false;
    } else if (pb > mu + tol) {
      return false;
    }
  }
  return true;
}

struct SampledDomination {
  bool violation_found;
  std::size_t samples;
};

/// Samples random subsets instead of enumerating all of them. A clean run is
/// evidence, not proof: the result is explicitly incomplete.
inline SampledDomination dominates_sampled(const Constraint& m, const DiscreteProbability& p,
                                           std::size_t samples, std::uint64_t seed,
                                           double tol = kDefaultTolerance) {
  if (m.space() != p.space()) throw SpaceMismatch("constraint and probability spaces differ");
  const std::size_t n = m.space().size();
  std::mt19937_64 gen(seed);
  // Equality must hold on the full space regardless of sampling.
  const SubsetMask full = SubsetMask::full(m.space());
  if (std::abs(p.probability_of(full) - outer_measure(m, full)) > tol)
    return {true, 0};
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<bool> member(n);
    for (std::size_t i = 0; i < n; ++i) member[i] = (gen() & 1u) != 0;
    SubsetMask b(m.space(), std::move(member));
    if (p.probability_of(b) > outer_measure(m, b) + tol) return {true, s + 1};
  }
  return {false, samples};
}

// ---- Constructor gallery ----------------------------------------------------

/// delta_1: nothing is known beyond the total mass.
inline Constraint uninformative(StateSpace space) {
  return Constraint::single(BoundFn::one(std::move(space)));
}

/// delta_{1_A}: the variable lies in A almost surely.
inline Constraint from_indicator(const SubsetMask& a) {
  if (a.is_empty()) throw std::invalid_argument("indicator constraint needs a non-empty set");
  return Constraint::single(BoundFn::indicator(a));
}

/// delta_{f / ||f||}: a single upper bound (possibility function).
inline Constraint from_possibility(const BoundFn& f, double tol = kDefaultTolerance) {
  return Constraint::single(normalize(f, tol));
}

/// sum_B q(B) delta_{1_B} over a partition of the space.
inline Constraint from_partition(const std::vector<SubsetMask>& blocks,
                                 const std::vector<double>& q, double tol = kDefaultTolerance) {
  if (blocks.empty()) throw std::invalid_argument("partition needs at least one block");
  if (blocks.size() != q.size())
    throw std::invalid_argument("one weight per partition block required");
  const StateSpace& space = blocks.front().space();
  std::vector<std::size_t> covered(space.size(), 0);
  double total = 0.0;
  std::vector<Component> comps;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].space() != space) throw SpaceMismatch("partition blocks on different spaces");
    if (blocks[k].is_empty()) throw std::invalid_argument("partition blocks must be non-empty");
    for (std::size_t i = 0; i < space.size(); ++i)
      if (blocks[k].contains(i)) ++covered[i];
    if (!(q[k] >= 0.0) || !std::isfinite(q[k]))
      throw std::invalid_argument("block weights must be finite and non-negative");
    total += q[k];
    comps.push_back({q[k], BoundFn::indicator(blocks[k])});
  }
  for (std::size_t i = 0; i < covered.size(); ++i)
    if (covered[i] != 1)
      throw std::invalid_argument("blocks must partition the space (point " + space.label(i) +
                                  " covered " + std::to_string(covered[i]) + " times)");
  if (std::abs(total - 1.0) > tol)
    throw std::invalid_argument("partition weights must sum to one");
  return Constraint(space, std::move(comps));
}

/// Support in singleton indicators: the constraint carries exactly p.
inline Constraint from_probability(const DiscreteProbability& p) {
  std::vector<Component> comps;
  for (std::size_t i = 0; i < p.space().size(); ++i) {
    const double w = p.weights()[i];
    if (w <= 0.0) continue;
    comps.push_back({w, BoundFn::indicator(SubsetMask::singleton(p.space(), i))});
  }
  return Constraint(p.space(), std::move(comps));
}

/// sum_A m(A) delta_{1_A}: the plausibility of B is the total mass of focal
/// sets meeting B.
inline Constraint from_mass_function(const MassFunction& m) {
  std::vector<Component> comps;
  comps.reserve(m.focal().size());
  for (const auto& f : m.focal()) comps.push_back({f.mass, BoundFn::indicator(f.subset)});
  return Constraint(m.space(), std::move(comps));
}

// ---- Comparison --------------------------------------------------------------

/// Component-multiset equality within tolerance, insensitive to order.
inline bool approx_equal(const Constraint& a, const Constraint& b,
                         double tol = kDefaultTolerance) {
  if (a.space() != b.space()) return false;
  if (a.components().size() != b.components().size()) return false;
  auto view = [](const Constraint& c) {
    std::vector<detail::CompView> v;
    for (const auto& comp : c.components()) v.push_back({comp.weight, comp.fn, comp.fn.to_values()});
    std::sort(v.begin(), v.end(), [](const detail::CompView& x, const detail::CompView& y) {
      if (x.weight != y.weight) return x.weight > y.weight;
      return x.values < y.values;
    });
    return v;
  };
  auto va = view(a);
  auto vb = view(b);
  std::vector<bool> used(vb.size(), false);
  for (const auto& x : va) {
    bool matched = false;
    for (std::size_t j = 0; j < vb.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(x.weight - vb[j].weight) <= tol &&
          detail::values_equal(x.values, vb[j].values, tol)) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

/// Mass-function equality up to focal-set reordering.
inline bool approx_equal(const MassFunction& a, const MassFunction& b,
                         double tol = kDefaultTolerance) {
  if (a.space() != b.space()) return false;
  if (a.focal().size() != b.focal().size()) return false;
  std::vector<bool> used(b.focal().size(), false);
  for (const auto& fa : a.focal()) {
    bool matched = false;
    for (std::size_t j = 0; j < b.focal().size(); ++j) {
      if (used[j]) continue;
      if (fa.subset == b.focal()[j].subset && std::abs(fa.mass - b.focal()[j].mass) <= tol) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

}  // namespace possfuse
