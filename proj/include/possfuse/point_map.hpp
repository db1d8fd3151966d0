#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "possfuse/common.hpp"
#include "possfuse/state_space.hpp"

namespace possfuse {

/// Total map between finite spaces, stored as a codomain index per domain
/// point. Surjectivity is derived at construction.
class PointMap {
 public:
  PointMap(StateSpace domain, StateSpace codomain, std::vector<std::size_t> table)
      : domain_(std::move(domain)), codomain_(std::move(codomain)), table_(std::move(table)) {
    if (table_.size() != domain_.size()) throw MapError("map must cover every domain point");
    std::vector<bool> hit(codomain_.size(), false);
    for (std::size_t t : table_) {
      if (t >= codomain_.size()) throw MapError("map target outside codomain");
      hit[t] = true;
    }
    surjective_ = true;
    for (bool b : hit) surjective_ = surjective_ && b;
  }

  static PointMap from_label_pairs(StateSpace domain, StateSpace codomain,
                                   const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::vector<std::size_t> table(domain.size(), domain.size());
    std::vector<bool> seen(domain.size(), false);
    for (const auto& [from, to] : pairs) {
      const std::size_t i = domain.index_of(from);
      if (seen[i]) throw MapError("duplicate map entry for label: " + from);
      seen[i] = true;
      if (!codomain.has_label(to)) throw MapError("map target is not a codomain label: " + to);
      table[i] = codomain.index_of(to);
    }
    for (std::size_t i = 0; i < domain.size(); ++i)
      if (!seen[i]) throw MapError("map is not total; missing label: " + domain.label(i));
    return PointMap(std::move(domain), std::move(codomain), std::move(table));
  }

  static PointMap identity(const StateSpace& space) {
    std::vector<std::size_t> table(space.size());
    for (std::size_t i = 0; i < table.size(); ++i) table[i] = i;
    return PointMap(space, space, std::move(table));
  }

  /// Canonical projection of a product space onto one factor.
  static PointMap projection(const StateSpace& product, Side keep) {
    if (!product.is_product()) throw std::invalid_argument("projection needs a product space");
    const StateSpace target = keep == Side::left ? product.left() : product.right();
    const std::size_t nr = product.right().size();
    std::vector<std::size_t> table(product.size());
    for (std::size_t k = 0; k < table.size(); ++k)
      table[k] = keep == Side::left ? k / nr : k % nr;
    return PointMap(product, target, std::move(table));
  }

  const StateSpace& domain() const { return domain_; }
  const StateSpace& codomain() const { return codomain_; }
  std::size_t apply(std::size_t i) const { return table_.at(i); }
  const std::vector<std::size_t>& table() const { return table_; }
  bool is_surjective() const { return surjective_; }

  /// Composition: first this map, then `next`.
  PointMap then(const PointMap& next) const {
    if (codomain_ != next.domain_) throw SpaceMismatch("maps do not compose");
    std::vector<std::size_t> table(table_.size());
    for (std::size_t i = 0; i < table.size(); ++i) table[i] = next.table_[table_[i]];
    return PointMap(domain_, next.codomain_, std::move(table));
  }

 private:
  StateSpace domain_;
  StateSpace codomain_;
  std::vector<std::size_t> table_;
  bool surjective_ = false;
};

}  // namespace possfuse
