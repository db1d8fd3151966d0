#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "possfuse/assimilation.hpp"
#include "possfuse/common.hpp"
#include "possfuse/constraint.hpp"
#include "possfuse/fusion.hpp"
#include "possfuse/point_map.hpp"
#include "possfuse/state_space.hpp"

namespace possfuse::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

/// FNV-1a digest of a file's bytes, as "fnv1a:<16 hex chars>".
inline std::string file_digest(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- Parsing -----------------------------------------------------------------

inline StateSpace space_from_json(const json& j) {
  try {
    if (j.contains("labels")) {
      return StateSpace::discrete(j.at("labels").get<std::vector<std::string>>());
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      return StateSpace::grid(g.at("lo").get<double>(), g.at("hi").get<double>(),
                              g.at("n").get<std::size_t>());
    }
    if (j.contains("product")) {
      const auto& p = j.at("product");
      if (!p.is_array() || p.size() != 2)
        throw ParseError("space product must list exactly two factor spaces");
      return StateSpace::product(space_from_json(p.at(0)), space_from_json(p.at(1)));
    }
    throw ParseError("space must provide labels, grid, or product");
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad space: ") + e.what());
  }
}

inline BoundFn fn_from_json(const json& j, const StateSpace& space) {
  try {
    if (j.is_string() && j.get<std::string>() == "one") return BoundFn::one(space);
    if (j.contains("dense"))
      return BoundFn::dense(space, j.at("dense").get<std::vector<double>>());
    if (j.contains("indicator"))
      return BoundFn::indicator(
          SubsetMask::of_labels(space, j.at("indicator").get<std::vector<std::string>>()));
    if (j.contains("gauss")) {
      const auto& g = j.at("gauss");
      GaussShape shape;
      shape.center = g.at("m").get<double>();
      shape.sigma = g.at("sigma").get<double>();
      shape.scale = g.at("c").get<double>();
      shape.obs_coeff = g.at("H").get<double>();
      return BoundFn::gauss(space, shape);
    }
    throw ParseError("fn must be \"one\", dense, indicator, or gauss");
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad fn: ") + e.what());
  }
}

struct ConstraintDoc {
  StateSpace space;
  Constraint constraint;
  std::optional<DiscreteProbability> probability;
};

inline ConstraintDoc constraint_doc_from_json(const json& j, double tol = kDefaultTolerance) {
  try {
    StateSpace space = space_from_json(j.at("space"));
    const auto& comps = j.at("constraint");
    if (!comps.is_array() || comps.empty())
      throw ParseError("constraint must be a non-empty component array");
    std::vector<Component> components;
    components.reserve(comps.size());
    for (const auto& c : comps)
      components.push_back({c.at("weight").get<double>(), fn_from_json(c.at("fn"), space)});
    ConstraintDoc doc{space, Constraint(space, std::move(components)), std::nullopt};
    if (j.contains("probability"))
      doc.probability.emplace(space, j.at("probability").get<std::vector<double>>(), tol);
    return doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad constraint doc: ") + e.what());
  }
}

inline PointMap map_from_json(const json& j) {
  StateSpace domain, codomain;
  std::vector<std::pair<std::string, std::string>> pairs;
  try {
    domain = space_from_json(j.at("domain"));
    codomain = space_from_json(j.at("codomain"));
    const auto& m = j.at("map");
    if (!m.is_object()) throw ParseError("map must be an object of label pairs");
    for (const auto& [from, to] : m.items()) pairs.emplace_back(from, to.get<std::string>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad map doc: ") + e.what());
  }
  return PointMap::from_label_pairs(std::move(domain), std::move(codomain), pairs);
}

inline MassFunction mass_from_json(const json& j, double tol = kDefaultTolerance) {
  StateSpace space;
  std::vector<FocalSet> focal;
  try {
    space = space_from_json(j.at("space"));
    for (const auto& f : j.at("mass")) {
      focal.push_back(
          {SubsetMask::of_labels(space, f.at("subset").get<std::vector<std::string>>()),
           f.at("mass").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad mass doc: ") + e.what());
  }
  return MassFunction(std::move(space), std::move(focal), tol);
}

/// Kernel doc: |Y| x |Y| tables of potentials and composition targets; a
/// null target means the pair is outside the kernel domain.
inline FusionKernel kernel_from_json(const json& j) {
  StateSpace space;
  std::vector<double> ell;
  std::vector<std::optional<std::size_t>> theta;
  try {
    space = space_from_json(j.at("space"));
    const std::size_t n = space.size();
    const auto& ell_rows = j.at("ell");
    const auto& theta_rows = j.at("theta");
    if (ell_rows.size() != n || theta_rows.size() != n)
      throw ParseError("kernel tables must have one row per point");
    for (std::size_t y = 0; y < n; ++y) {
      const auto& er = ell_rows.at(y);
      const auto& tr = theta_rows.at(y);
      if (er.size() != n || tr.size() != n)
        throw ParseError("kernel tables must have one column per point");
      for (std::size_t yp = 0; yp < n; ++yp) {
        ell.push_back(er.at(yp).get<double>());
        if (tr.at(yp).is_null())
          theta.emplace_back();
        else
          theta.emplace_back(space.index_of(tr.at(yp).get<std::string>()));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad kernel doc: ") + e.what());
  }
  return FusionKernel(std::move(space), std::move(ell), std::move(theta));
}

inline ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig cfg;
  try {
    cfg.steps = j.at("steps").get<int>();
    const auto& dyn = j.at("dynamics");
    cfg.dyn_a = dyn.at("a").get<double>();
    cfg.process_noise_q = dyn.at("q").get<double>();
    const auto& sensor = j.at("sensor");
    cfg.obs_coeff = sensor.at("H").get<double>();
    cfg.sensor_sigma = sensor.at("sigma").get<double>();
    if (sensor.contains("cell_width")) cfg.cell_width = sensor.at("cell_width").get<double>();
    if (sensor.contains("cell_sigma")) cfg.cell_sigma = sensor.at("cell_sigma").get<double>();
    const auto& prior = j.at("prior");
    cfg.initial.mean = prior.at("mean").get<double>();
    cfg.initial.var = prior.at("var").get<double>();
    if (j.contains("observations"))
      cfg.observations = j.at("observations").get<std::vector<double>>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad scenario doc: ") + e.what());
  }
  return cfg;
}

// ---- Emission ----------------------------------------------------------------

/// 17 significant digits: enough for doubles to round-trip exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline ordered_json space_to_json(const StateSpace& space) {
  ordered_json out;
  if (space.is_product()) {
    out["product"] = ordered_json::array({space_to_json(space.left()), space_to_json(space.right())});
  } else if (space.has_grid()) {
    out["grid"] = {{"lo", space.grid_lo()}, {"hi", space.grid_hi()}, {"n", space.size()}};
  } else {
    out["labels"] = space.labels();
  }
  return out;
}

inline ordered_json fn_to_json(const BoundFn& fn) {
  ordered_json out;
  if (fn.is_gauss()) {
    const GaussShape& g = fn.gauss_shape();
    out["gauss"] = {{"m", g.center}, {"sigma", g.sigma}, {"c", g.scale}, {"H", g.obs_coeff}};
  } else {
    out["dense"] = fn.to_values();
  }
  return out;
}

/// Components sorted by descending weight, ties by lexicographic values, so
/// serialized constraints are byte-stable.
inline ordered_json constraint_to_json(const Constraint& c) {
  std::vector<detail::CompView> views;
  views.reserve(c.components().size());
  for (const auto& comp : c.components())
    views.push_back({comp.weight, comp.fn, comp.fn.to_values()});
  std::sort(views.begin(), views.end(), [](const detail::CompView& a, const detail::CompView& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.values < b.values;
  });
  ordered_json out;
  out["space"] = space_to_json(c.space());
  ordered_json comps = ordered_json::array();
  for (const auto& v : views) {
    ordered_json item;
    item["weight"] = v.weight;
    item["fn"] = fn_to_json(v.fn);
    comps.push_back(std::move(item));
  }
  out["constraint"] = std::move(comps);
  return out;
}

inline ordered_json mass_to_json(const MassFunction& m) {
  ordered_json out;
  out["space"] = space_to_json(m.space());
  ordered_json focal = ordered_json::array();
  for (const auto& f : m.focal()) {
    ordered_json item;
    item["subset"] = f.subset.member_labels();
    item["mass"] = f.mass;
    focal.push_back(std::move(item));
  }
  out["mass"] = std::move(focal);
  return out;
}

namespace detail_dump {

inline void dump_value(const ordered_json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string pad_in(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + json(key).dump() + ": ";
        dump_value(value, out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in;
        dump_value(value, out, depth + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case ordered_json::value_t::string:
      out += json(j.get<std::string>()).dump();
      return;
    case ordered_json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      return;
    case ordered_json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      return;
    case ordered_json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      return;
    case ordered_json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += "null";
      return;
  }
}

}  // namespace detail_dump

/// Serializes a report; floats carry 17 significant digits.
inline std::string dump_report(const ordered_json& j) {
  std::string out;
  detail_dump::dump_value(j, out, 0);
  out += "\n";
  return out;
}

}  // namespace possfuse::io
