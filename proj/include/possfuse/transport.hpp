#pragma once

#include <utility>
#include <vector>

#include "possfuse/bound_fn.hpp"
#include "possfuse/common.hpp"
#include "possfuse/constraint.hpp"
#include "possfuse/point_map.hpp"

namespace possfuse {

/// Transports M along xi by replacing each component with its fiber-wise
/// supremum. The outer measure of B under the result equals the outer
/// measure of the preimage of B under M; no re-normalization happens here,
/// so the identity holds even for non-surjective maps.
inline Constraint pushforward(const Constraint& m, const PointMap& xi) {
  if (m.space() != xi.domain()) throw SpaceMismatch("constraint does not live on the map domain");
  std::vector<Component> comps;
  comps.reserve(m.components().size());
  for (const auto& c : m.components()) comps.push_back({c.weight, fiber_sup(c.fn, xi)});
  return Constraint(xi.codomain(), std::move(comps));
}

/// Transports M backwards along xi by composing each component with xi. The
/// result bounds every pullback measure of a measure bounded by M.
inline Constraint pullback(const Constraint& m, const PointMap& xi) {
  if (m.space() != xi.codomain())
    throw SpaceMismatch("constraint does not live on the map codomain");
  std::vector<Component> comps;
  comps.reserve(m.components().size());
  for (const auto& c : m.components()) comps.push_back({c.weight, compose(c.fn, xi)});
  return Constraint(xi.domain(), std::move(comps));
}

/// Pushforward along the canonical projection of a product space onto the
/// factor named by `keep`; component functions become partial suprema.
inline Constraint marginalize(const Constraint& m, Side keep) {
  if (!m.space().is_product())
    throw std::invalid_argument("marginalization needs a product-space constraint");
  return pushforward(m, PointMap::projection(m.space(), keep));
}

}  // namespace possfuse
