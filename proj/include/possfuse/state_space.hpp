#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "possfuse/common.hpp"

namespace possfuse {

enum class Side { left, right };

struct StateSpaceImpl;

/// Finite labeled set standing in for the state space. A space may carry a
/// product structure (labels are Cartesian pairs) or an embedded uniform
/// real grid with recorded (lo, hi, n); events are arbitrary subsets.
class StateSpace {
 public:
  StateSpace() = default;

  static StateSpace discrete(std::vector<std::string> labels);
  static StateSpace grid(double lo, double hi, std::size_t n);
  static StateSpace product(const StateSpace& left, const StateSpace& right);

  std::size_t size() const;
  const std::vector<std::string>& labels() const;
  const std::string& label(std::size_t i) const;
  std::size_t index_of(const std::string& label) const;
  bool has_label(const std::string& label) const;

  bool is_product() const;
  const StateSpace& left() const;
  const StateSpace& right() const;
  /// Row-major index of the pair (i, j) in a product space.
  std::size_t pair_index(std::size_t i, std::size_t j) const;

  bool has_grid() const;
  double grid_lo() const;
  double grid_hi() const;
  /// Embedded real coordinate of point i on a grid space.
  double grid_point(std::size_t i) const;

  friend bool operator==(const StateSpace& a, const StateSpace& b);
  friend bool operator!=(const StateSpace& a, const StateSpace& b) { return !(a == b); }

 private:
  explicit StateSpace(std::shared_ptr<const StateSpaceImpl> impl) : impl_(std::move(impl)) {}

  const StateSpaceImpl& impl() const;

  std::shared_ptr<const StateSpaceImpl> impl_;
};

struct StateSpaceImpl {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> index;
  std::optional<std::pair<StateSpace, StateSpace>> factors;
  bool has_grid = false;
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

inline std::shared_ptr<StateSpaceImpl> make_space_impl(std::vector<std::string> labels) {
  if (labels.empty()) throw std::invalid_argument("state space must have at least one point");
  auto impl = std::make_shared<StateSpaceImpl>();
  impl->labels = std::move(labels);
  impl->index.reserve(impl->labels.size());
  for (std::size_t i = 0; i < impl->labels.size(); ++i) {
    if (!impl->index.emplace(impl->labels[i], i).second)
      throw std::invalid_argument("state space labels must be unique: " + impl->labels[i]);
  }
  return impl;
}

}  // namespace detail

inline const StateSpaceImpl& StateSpace::impl() const {
  if (!impl_) throw std::logic_error("use of default-constructed StateSpace");
  return *impl_;
}

inline StateSpace StateSpace::discrete(std::vector<std::string> labels) {
  return StateSpace(detail::make_space_impl(std::move(labels)));
}

inline StateSpace StateSpace::grid(double lo, double hi, std::size_t n) {
  if (n == 0) throw std::invalid_argument("grid needs at least one point");
  if (n > 1 && !(lo < hi)) throw std::invalid_argument("grid requires lo < hi");
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  auto impl = detail::make_space_impl(std::move(labels));
  impl->has_grid = true;
  impl->lo = lo;
  impl->hi = n > 1 ? hi : lo;
  return StateSpace(std::move(impl));
}

inline StateSpace StateSpace::product(const StateSpace& left, const StateSpace& right) {
  std::vector<std::string> labels;
  labels.reserve(left.size() * right.size());
  for (const auto& a : left.labels())
    for (const auto& b : right.labels()) labels.push_back("(" + a + "," + b + ")");
  auto impl = detail::make_space_impl(std::move(labels));
  impl->factors.emplace(left, right);
  return StateSpace(std::move(impl));
}

inline std::size_t StateSpace::size() const { return impl().labels.size(); }

inline const std::vector<std::string>& StateSpace::labels() const { return impl().labels; }

inline const std::string& StateSpace::label(std::size_t i) const { return impl().labels.at(i); }

inline std::size_t StateSpace::index_of(const std::string& label) const {
  auto it = impl().index.find(label);
  if (it == impl().index.end()) throw std::invalid_argument("unknown label: " + label);
  return it->second;
}

inline bool StateSpace::has_label(const std::string& label) const {
  return impl().index.count(label) != 0;
}

inline bool StateSpace::is_product() const { return impl().factors.has_value(); }

inline const StateSpace& StateSpace::left() const {
  if (!is_product()) throw std::logic_error("not a product space");
  return impl().factors->first;
}

inline const StateSpace& StateSpace::right() const {
  if (!is_product()) throw std::logic_error("not a product space");
  return impl().factors->second;
}

inline std::size_t StateSpace::pair_index(std::size_t i, std::size_t j) const {
  return i * right().size() + j;
}

inline bool StateSpace::has_grid() const { return impl().has_grid; }

inline double StateSpace::grid_lo() const { return impl().lo; }

inline double StateSpace::grid_hi() const { return impl().hi; }

inline double StateSpace::grid_point(std::size_t i) const {
  const auto& im = impl();
  if (!im.has_grid) throw std::logic_error("space has no grid embedding");
  const std::size_t n = im.labels.size();
  if (n == 1) return im.lo;
  return im.lo + (im.hi - im.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

inline bool operator==(const StateSpace& a, const StateSpace& b) {
  if (a.impl_ == b.impl_) return true;
  if (!a.impl_ || !b.impl_) return false;
  const auto& x = *a.impl_;
  const auto& y = *b.impl_;
  if (x.labels != y.labels) return false;
  if (x.has_grid != y.has_grid || x.lo != y.lo || x.hi != y.hi) return false;
  if (x.factors.has_value() != y.factors.has_value()) return false;
  if (x.factors)
    return x.factors->first == y.factors->first && x.factors->second == y.factors->second;
  return true;
}

/// Subset of a state space as a membership vector.
class SubsetMask {
 public:
  SubsetMask(StateSpace space, std::vector<bool> membership)
      : space_(std::move(space)), member_(std::move(membership)) {
    if (member_.size() != space_.size())
      throw std::invalid_argument("mask length must equal space size");
  }

  static SubsetMask empty(StateSpace space) {
    const std::size_t n = space.size();
    return SubsetMask(std::move(space), std::vector<bool>(n, false));
  }

  static SubsetMask full(StateSpace space) {
    const std::size_t n = space.size();
    return SubsetMask(std::move(space), std::vector<bool>(n, true));
  }

  static SubsetMask singleton(StateSpace space, std::size_t i) {
    auto m = empty(std::move(space));
    m.member_.at(i) = true;
    return m;
  }

  static SubsetMask of_labels(StateSpace space, const std::vector<std::string>& labels) {
    auto m = empty(space);
    for (const auto& l : labels) m.member_[space.index_of(l)] = true;
    return m;
  }

  /// Mask from the low bits of a word; handy for exhaustive subset loops.
  static SubsetMask from_bits(StateSpace space, std::uint64_t bits) {
    const std::size_t n = space.size();
    if (n > 64) throw std::invalid_argument("from_bits supports at most 64 points");
    std::vector<bool> member(n, false);
    for (std::size_t i = 0; i < n; ++i) member[i] = (bits >> i) & 1u;
    return SubsetMask(std::move(space), std::move(member));
  }

  const StateSpace& space() const { return space_; }
  std::size_t size() const { return member_.size(); }
  bool contains(std::size_t i) const { return member_.at(i); }

  std::size_t count() const {
    std::size_t c = 0;
    for (bool b : member_) c += b ? 1 : 0;
    return c;
  }

  bool is_empty() const { return count() == 0; }

  SubsetMask complement() const {
    std::vector<bool> member(member_.size());
    for (std::size_t i = 0; i < member_.size(); ++i) member[i] = !member_[i];
    return SubsetMask(space_, std::move(member));
  }

  bool is_subset_of(const SubsetMask& other) const {
    require_same_space(other);
    for (std::size_t i = 0; i < member_.size(); ++i)
      if (member_[i] && !other.member_[i]) return false;
    return true;
  }

  std::vector<std::string> member_labels() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < member_.size(); ++i)
      if (member_[i]) out.push_back(space_.label(i));
    return out;
  }

  friend SubsetMask intersect(const SubsetMask& a, const SubsetMask& b) {
    a.require_same_space(b);
    std::vector<bool> member(a.member_.size());
    for (std::size_t i = 0; i < member.size(); ++i) member[i] = a.member_[i] && b.member_[i];
    return SubsetMask(a.space_, std::move(member));
  }

  friend SubsetMask unite(const SubsetMask& a, const SubsetMask& b) {
    a.require_same_space(b);
    std::vector<bool> member(a.member_.size());
    for (std::size_t i = 0; i < member.size(); ++i) member[i] = a.member_[i] || b.member_[i];
    return SubsetMask(a.space_, std::move(member));
  }

  friend bool operator==(const SubsetMask& a, const SubsetMask& b) {
    return a.space_ == b.space_ && a.member_ == b.member_;
  }

 private:
  void require_same_space(const SubsetMask& other) const {
    if (space_ != other.space_) throw SpaceMismatch("masks live on different spaces");
  }

  StateSpace space_;
  std::vector<bool> member_;
};

}  // namespace possfuse
