#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "possfuse/bound_fn.hpp"
#include "possfuse/common.hpp"
#include "possfuse/constraint.hpp"
#include "possfuse/state_space.hpp"

namespace possfuse {

struct FusionDiagnostics {
  /// ||P * P'||: the total weight mass before normalization.
  double normalizer = 0.0;
  /// 1 - normalizer; the total conflict when both inputs are canonical.
  double conflict = 0.0;
  /// Pairwise components with non-zero product norm, before prune/merge.
  std::size_t components_before_prune = 0;
};

/// Data assimilation of two constraints on the same state space: all
/// pairwise pointwise products, rescaled to canonical form and divided by
/// the normalizer C = sum_ij a_i a'_j ||f_i f'_j||. Throws
/// IncompatibleConstraints when C vanishes (total conflict). The output is
/// canonical whenever both inputs are.
inline std::pair<Constraint, FusionDiagnostics> fuse(const Constraint& p, const Constraint& pp,
                                                     double tol = kDefaultTolerance) {
  if (p.space() != pp.space()) throw SpaceMismatch("fusion inputs live on different spaces");

  std::vector<Component> raw;
  raw.reserve(p.components().size() * pp.components().size());
  double normalizer = 0.0;
  for (const auto& a : p.components()) {
    for (const auto& b : pp.components()) {
      BoundFn prod = pointwise_product(a.fn, b.fn);
      const double s = sup_norm(prod);
      if (s <= 0.0) continue;
      const double w = a.weight * b.weight * s;
      normalizer += w;
      raw.push_back({w, normalize(prod, tol)});
    }
  }
  FusionDiagnostics diag;
  diag.normalizer = normalizer;
  diag.conflict = 1.0 - normalizer;
  diag.components_before_prune = raw.size();
  if (normalizer <= tol)
    throw IncompatibleConstraints("incompatible constraints: fusion normalizer is zero");
  for (auto& c : raw) c.weight /= normalizer;
  auto tidy = detail::tidy_components(std::move(raw), tol);
  if (tidy.empty()) throw IncompatibleConstraints("incompatible constraints: everything pruned");
  return {Constraint(p.space(), std::move(tidy)), diag};
}

/// Dempster's rule of combination computed directly on focal sets; returns
/// the combined mass function and the conflict mass. Kept free of the
/// constraint machinery so it can serve as an independent oracle for fuse.
inline std::pair<MassFunction, double> dempster_combine(const MassFunction& m,
                                                        const MassFunction& mp,
                                                        double tol = kDefaultTolerance) {
  if (m.space() != mp.space()) throw SpaceMismatch("mass functions live on different frames");

  std::vector<FocalSet> combined;
  double conflict = 0.0;
  for (const auto& a : m.focal()) {
    for (const auto& b : mp.focal()) {
      const double w = a.mass * b.mass;
      SubsetMask inter = intersect(a.subset, b.subset);
      if (inter.is_empty()) {
        conflict += w;
        continue;
      }
      bool found = false;
      for (auto& f : combined) {
        if (f.subset == inter) {
          f.mass += w;
          found = true;
          break;
        }
      }
      if (!found) combined.push_back({std::move(inter), w});
    }
  }
  if (conflict >= 1.0 - tol)
    throw IncompatibleConstraints("incompatible constraints: total conflict");
  const double keep = 1.0 - conflict;
  for (auto& f : combined) f.mass /= keep;
  std::sort(combined.begin(), combined.end(), [](const FocalSet& x, const FocalSet& y) {
    if (x.mass != y.mass) return x.mass > y.mass;
    return x.subset.member_labels() < y.subset.member_labels();
  });
  return {MassFunction(m.space(), std::move(combined), 1e-6), conflict};
}

/// Combination rule on a second-order space Y: a potential ell on ordered
/// pairs and a partial composition theta defined exactly where ell may be
/// non-zero. Pairs outside the domain of theta behave as if mapped to an
/// isolated point with zero potential.
class FusionKernel {
 public:
  FusionKernel(StateSpace space, std::vector<double> ell,
               std::vector<std::optional<std::size_t>> theta)
      : space_(std::move(space)), ell_(std::move(ell)), theta_(std::move(theta)) {
    const std::size_t n = space_.size();
    if (ell_.size() != n * n || theta_.size() != n * n)
      throw KernelError("kernel tables must be |Y| x |Y|");
    std::vector<bool> hit(n, false);
    for (std::size_t k = 0; k < n * n; ++k) {
      if (!(ell_[k] >= 0.0 && ell_[k] <= 1.0))
        throw KernelError("ell entries must lie in [0, 1]");
      if (theta_[k]) {
        if (*theta_[k] >= n) throw KernelError("theta target outside the space");
        hit[*theta_[k]] = true;
      } else if (ell_[k] != 0.0) {
        throw KernelError("ell must vanish where theta is undefined");
      }
    }
    for (bool b : hit)
      if (!b) throw KernelError("theta must be surjective onto the space");
  }

  /// Same-point kernel: ell(y, y') = 1 iff y = y', theta(y, y) = y. Recovers
  /// plain state-space fusion.
  static FusionKernel diagonal(const StateSpace& space) {
    const std::size_t n = space.size();
    std::vector<double> ell(n * n, 0.0);
    std::vector<std::optional<std::size_t>> theta(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      ell[i * n + i] = 1.0;
      theta[i * n + i] = i;
    }
    return FusionKernel(space, std::move(ell), std::move(theta));
  }

  const StateSpace& space() const { return space_; }
  double ell(std::size_t y, std::size_t yp) const { return ell_[y * space_.size() + yp]; }
  std::optional<std::size_t> theta(std::size_t y, std::size_t yp) const {
    return theta_[y * space_.size() + yp];
  }

 private:
  StateSpace space_;
  std::vector<double> ell_;
  std::vector<std::optional<std::size_t>> theta_;
};

/// Kernel combination of two functions:
/// (f, f') -> yhat -> sup over theta-preimages of yhat of ell(y,y') f(y) f'(y').
/// Points with an empty preimage get 0.
inline BoundFn kernel_combine(const BoundFn& f, const BoundFn& fp, const FusionKernel& k) {
  if (f.space() != k.space() || fp.space() != k.space())
    throw SpaceMismatch("functions do not live on the kernel space");
  const std::size_t n = k.space().size();
  std::vector<double> values(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t yp = 0; yp < n; ++yp) {
      const auto target = k.theta(y, yp);
      if (!target) continue;
      const double cand = k.ell(y, yp) * f.value(y) * fp.value(yp);
      values[*target] = std::max(values[*target], cand);
    }
  }
  return BoundFn::dense(k.space(), std::move(values));
}

/// True iff theta is associative as a partial binary operation (under the
/// isolated-point extension) and ell satisfies the cocycle identity
/// ell(y,y') ell(theta(y,y'),y'') = ell(y,theta(y',y'')) ell(y',y'') on all
/// triples. These two conditions make the kernel combination associative.
inline bool check_kernel_associativity(const FusionKernel& k, double tol = kDefaultTolerance) {
  const std::size_t n = k.space().size();
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t yp = 0; yp < n; ++yp) {
      for (std::size_t ypp = 0; ypp < n; ++ypp) {
        const auto left_inner = k.theta(y, yp);
        const auto left = left_inner ? k.theta(*left_inner, ypp) : std::optional<std::size_t>{};
        const auto right_inner = k.theta(yp, ypp);
        const auto right = right_inner ? k.theta(y, *right_inner) : std::optional<std::size_t>{};
        if (left.has_value() != right.has_value()) return false;
        if (left && *left != *right) return false;

        const double lhs = k.ell(y, yp) * (left_inner ? k.ell(*left_inner, ypp) : 0.0);
        const double rhs = (right_inner ? k.ell(y, *right_inner) : 0.0) * k.ell(yp, ypp);
        if (std::abs(lhs - rhs) > tol) return false;
      }
    }
  }
  return true;
}

enum class KernelCheck {
  /// Verify associativity when the space is small (at most 64 points).
  automatic,
  always,
  skip,
};

/// General fusion over a kernel: pairwise kernel combinations in place of
/// pointwise products. Associativity of the kernel is the caller's burden;
/// by default it is verified on small spaces and trusted on large ones.
inline std::pair<Constraint, FusionDiagnostics> general_fuse(const Constraint& p,
                                                             const Constraint& pp,
                                                             const FusionKernel& k,
                                                             KernelCheck check = KernelCheck::automatic,
                                                             double tol = kDefaultTolerance) {
  if (p.space() != k.space() || pp.space() != k.space())
    throw SpaceMismatch("fusion inputs do not live on the kernel space");
  const bool verify = check == KernelCheck::always ||
                      (check == KernelCheck::automatic && k.space().size() <= 64);
  if (verify && !check_kernel_associativity(k, tol))
    throw KernelNotAssociative("kernel fails the associativity conditions");

  std::vector<Component> raw;
  raw.reserve(p.components().size() * pp.components().size());
  double normalizer = 0.0;
  for (const auto& a : p.components()) {
    for (const auto& b : pp.components()) {
      BoundFn comb = kernel_combine(a.fn, b.fn, k);
      const double s = sup_norm(comb);
      if (s <= 0.0) continue;
      const double w = a.weight * b.weight * s;
      normalizer += w;
      raw.push_back({w, normalize(comb, tol)});
    }
  }
  FusionDiagnostics diag;
  diag.normalizer = normalizer;
  diag.conflict = 1.0 - normalizer;
  diag.components_before_prune = raw.size();
  if (normalizer <= tol)
    throw IncompatibleConstraints("incompatible constraints: fusion normalizer is zero");
  for (auto& c : raw) c.weight /= normalizer;
  auto tidy = detail::tidy_components(std::move(raw), tol);
  if (tidy.empty()) throw IncompatibleConstraints("incompatible constraints: everything pruned");
  return {Constraint(p.space(), std::move(tidy)), diag};
}

}  // namespace possfuse
