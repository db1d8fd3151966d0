#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "possfuse/common.hpp"
#include "possfuse/point_map.hpp"
#include "possfuse/state_space.hpp"

namespace possfuse {

/// Parametric bound of the form x -> scale * exp(-(obs_coeff*x - center)^2 / (2 sigma^2)),
/// evaluated on the real grid embedded in the owning space. The supremum is
/// the analytic one over the grid hull [lo, hi].
struct GaussShape {
  double center = 0.0;
  double sigma = 1.0;
  double scale = 1.0;
  double obs_coeff = 1.0;

  double value_at(double x) const {
    const double d = obs_coeff * x - center;
    return scale * std::exp(-d * d / (2.0 * sigma * sigma));
  }
};

/// Non-negative bounded function on a finite state space, stored either as a
/// dense table of values or as a Gaussian-shaped parametric form on a grid.
class BoundFn {
 public:
  static BoundFn dense(StateSpace space, std::vector<double> values) {
    if (values.size() != space.size())
      throw std::invalid_argument("dense function length must equal space size");
    for (double v : values)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("function values must be finite and non-negative");
    return BoundFn(std::move(space), std::move(values));
  }

  static BoundFn constant(StateSpace space, double value) {
    const std::size_t n = space.size();
    return dense(std::move(space), std::vector<double>(n, value));
  }

  /// The function everywhere equal to one.
  static BoundFn one(StateSpace space) { return constant(std::move(space), 1.0); }

  static BoundFn indicator(const SubsetMask& set) {
    std::vector<double> values(set.size(), 0.0);
    for (std::size_t i = 0; i < values.size(); ++i)
      if (set.contains(i)) values[i] = 1.0;
    return BoundFn(set.space(), std::move(values));
  }

  static BoundFn gauss(StateSpace space, GaussShape shape) {
    if (!space.has_grid())
      throw std::invalid_argument("gauss-shaped functions need a grid-embedded space");
    if (!(shape.sigma > 0.0)) throw std::invalid_argument("gauss shape requires sigma > 0");
    if (!(shape.scale >= 0.0 && shape.scale <= 1.0))
      throw std::invalid_argument("gauss shape requires scale in [0, 1]");
    return BoundFn(std::move(space), shape);
  }

  const StateSpace& space() const { return space_; }
  std::size_t size() const { return space_.size(); }
  bool is_gauss() const { return gauss_.has_value(); }
  const GaussShape& gauss_shape() const {
    if (!gauss_) throw std::logic_error("not a gauss-shaped function");
    return *gauss_;
  }

  double value(std::size_t i) const {
    if (gauss_) return gauss_->value_at(space_.grid_point(i));
    return values_[i];
  }

  /// Dense tabulation of the function.
  std::vector<double> to_values() const {
    if (!gauss_) return values_;
    std::vector<double> out(space_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = gauss_->value_at(space_.grid_point(i));
    return out;
  }

 private:
  BoundFn(StateSpace space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {}
  BoundFn(StateSpace space, GaussShape shape) : space_(std::move(space)), gauss_(shape) {}

  StateSpace space_;
  std::vector<double> values_;
  std::optional<GaussShape> gauss_;
};

namespace detail {

// Analytic supremum of a gauss shape over the grid hull; second member tells
// whether it is attained at the interior peak (then it equals `scale`).
inline std::pair<double, bool> gauss_sup(const GaussShape& g, const StateSpace& space) {
  if (g.obs_coeff == 0.0) return {g.value_at(0.0), false};
  const double peak_x = g.center / g.obs_coeff;
  if (peak_x >= space.grid_lo() && peak_x <= space.grid_hi()) return {g.scale, true};
  return {std::max(g.value_at(space.grid_lo()), g.value_at(space.grid_hi())), false};
}

inline void require_same_space(const BoundFn& f, const BoundFn& g) {
  if (f.space() != g.space()) throw SpaceMismatch("functions live on different spaces");
}

}  // namespace detail

/// Uniform norm: the supremum of f. For gauss shapes this is the analytic
/// supremum over the grid hull.
inline double sup_norm(const BoundFn& f) {
  if (f.is_gauss()) return detail::gauss_sup(f.gauss_shape(), f.space()).first;
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, f.value(i));
  return m;
}

/// Supremum of f over the points of A; 0 when A is empty.
inline double sup_over(const BoundFn& f, const SubsetMask& a) {
  if (f.space() != a.space()) throw SpaceMismatch("function and mask live on different spaces");
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (a.contains(i)) m = std::max(m, f.value(i));
  return m;
}

/// Pointwise product f*g. Two gauss shapes on the same grid stay in closed
/// form; every other pairing is tabulated.
inline BoundFn pointwise_product(const BoundFn& f, const BoundFn& g) {
  detail::require_same_space(f, g);
  if (f.is_gauss() && g.is_gauss()) {
    const GaussShape& a = f.gauss_shape();
    const GaussShape& b = g.gauss_shape();
    // Sum the two quadratic exponents and complete the square in x.
    const double alpha = a.obs_coeff * a.obs_coeff / (a.sigma * a.sigma) +
                         b.obs_coeff * b.obs_coeff / (b.sigma * b.sigma);
    const double beta = a.obs_coeff * a.center / (a.sigma * a.sigma) +
                        b.obs_coeff * b.center / (b.sigma * b.sigma);
    const double gamma =
        a.center * a.center / (a.sigma * a.sigma) + b.center * b.center / (b.sigma * b.sigma);
    GaussShape out;
    if (alpha > 0.0) {
      const double residual = std::max(0.0, gamma - beta * beta / alpha);
      out.obs_coeff = 1.0;
      out.sigma = 1.0 / std::sqrt(alpha);
      out.center = beta / alpha;
      out.scale = a.scale * b.scale * std::exp(-residual / 2.0);
    } else {
      // Both shapes are constant in x.
      out.obs_coeff = 0.0;
      out.sigma = 1.0;
      out.center = 0.0;
      out.scale = a.scale * b.scale * std::exp(-gamma / 2.0);
    }
    return BoundFn::gauss(f.space(), out);
  }
  std::vector<double> values(f.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f.value(i) * g.value(i);
  return BoundFn::dense(f.space(), std::move(values));
}

/// Tensor product on the product space: (x, x') -> f(x) g(x').
inline BoundFn tensor_product(const BoundFn& f, const BoundFn& g) {
  const StateSpace prod = StateSpace::product(f.space(), g.space());
  std::vector<double> values(prod.size());
  const std::size_t nr = g.size();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double fv = f.value(i);
    for (std::size_t j = 0; j < nr; ++j) values[i * nr + j] = fv * g.value(j);
  }
  return BoundFn::dense(prod, std::move(values));
}

/// Rescales f to unit sup norm; the (near-)zero function maps to the
/// constant one. Idempotent.
inline BoundFn normalize(const BoundFn& f, double tol = kDefaultTolerance) {
  if (f.is_gauss()) {
    const auto [sup, at_peak] = detail::gauss_sup(f.gauss_shape(), f.space());
    if (sup <= tol) return BoundFn::one(f.space());
    if (at_peak) {
      GaussShape g = f.gauss_shape();
      g.scale = g.scale / sup;
      return BoundFn::gauss(f.space(), g);
    }
    // Peak outside the hull: rescaling would push the formal scale above 1.
    std::vector<double> values = f.to_values();
    for (double& v : values) v /= sup;
    return BoundFn::dense(f.space(), std::move(values));
  }
  const double sup = sup_norm(f);
  if (sup <= tol) return BoundFn::one(f.space());
  std::vector<double> values = f.to_values();
  for (double& v : values) v /= sup;
  return BoundFn::dense(f.space(), std::move(values));
}

/// Transports f along xi by taking the supremum over each fiber; points with
/// an empty fiber get 0.
inline BoundFn fiber_sup(const BoundFn& f, const PointMap& xi) {
  if (f.space() != xi.domain()) throw SpaceMismatch("function does not live on the map domain");
  std::vector<double> values(xi.codomain().size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::size_t y = xi.apply(i);
    values[y] = std::max(values[y], f.value(i));
  }
  return BoundFn::dense(xi.codomain(), std::move(values));
}

/// Pulls f back along xi: x -> f(xi(x)).
inline BoundFn compose(const BoundFn& f, const PointMap& xi) {
  if (f.space() != xi.codomain()) throw SpaceMismatch("function does not live on the map codomain");
  std::vector<double> values(xi.domain().size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = f.value(xi.apply(i));
  return BoundFn::dense(xi.domain(), std::move(values));
}

}  // namespace possfuse
