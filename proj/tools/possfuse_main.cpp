// possfuse: fuse, transport, and filter supremum-based uncertainty
// representations on finite state spaces.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "possfuse/possfuse.hpp"

namespace {

using possfuse::io::ordered_json;

struct Options {
  std::string out_path;
  std::string csv_path;
  std::string kernel_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool oracle = false;
  bool no_verify_kernel = false;
  double tolerance = possfuse::kDefaultTolerance;
  std::string side;
};

void write_text(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw possfuse::Error("cannot write file: " + path);
  out << text;
}

void emit_report(const ordered_json& report, const Options& opt) {
  write_text(possfuse::io::dump_report(report), opt.out_path);
}

ordered_json diagnostics_json(const possfuse::FusionDiagnostics& diag, std::size_t result_size) {
  ordered_json out;
  out["normalizer"] = diag.normalizer;
  out["conflict"] = diag.conflict;
  out["components_before_prune"] = diag.components_before_prune;
  out["components"] = result_size;
  return out;
}

int cmd_fuse(const std::vector<std::string>& files, const Options& opt) {
  auto a = possfuse::io::constraint_doc_from_json(possfuse::io::load_json_file(files[0]), opt.tolerance);
  auto b = possfuse::io::constraint_doc_from_json(possfuse::io::load_json_file(files[1]), opt.tolerance);

  ordered_json report;
  report["operation"] = "fuse";
  report["inputs"] = {possfuse::io::file_digest(files[0]), possfuse::io::file_digest(files[1])};
  if (!opt.kernel_path.empty()) {
    auto kernel = possfuse::io::kernel_from_json(possfuse::io::load_json_file(opt.kernel_path));
    const auto check =
        opt.no_verify_kernel ? possfuse::KernelCheck::skip : possfuse::KernelCheck::automatic;
    auto [result, diag] =
        possfuse::general_fuse(a.constraint, b.constraint, kernel, check, opt.tolerance);
    report["kernel"] = possfuse::io::file_digest(opt.kernel_path);
    report["result"] = possfuse::io::constraint_to_json(result);
    report["diagnostics"] = diagnostics_json(diag, result.components().size());
  } else {
    auto [result, diag] = possfuse::fuse(a.constraint, b.constraint, opt.tolerance);
    report["result"] = possfuse::io::constraint_to_json(result);
    report["diagnostics"] = diagnostics_json(diag, result.components().size());
  }
  emit_report(report, opt);
  return 0;
}

int cmd_transport(const std::string& op, const std::vector<std::string>& files, const Options& opt) {
  auto doc = possfuse::io::constraint_doc_from_json(possfuse::io::load_json_file(files[0]), opt.tolerance);
  auto map = possfuse::io::map_from_json(possfuse::io::load_json_file(files[1]));
  possfuse::Constraint result = op == "push" ? possfuse::pushforward(doc.constraint, map)
                                             : possfuse::pullback(doc.constraint, map);
  ordered_json report;
  report["operation"] = op;
  report["inputs"] = {possfuse::io::file_digest(files[0]), possfuse::io::file_digest(files[1])};
  report["map"] = ordered_json{{"surjective", map.is_surjective()}};
  report["result"] = possfuse::io::constraint_to_json(result);
  emit_report(report, opt);
  return 0;
}

int cmd_marginalize(const std::string& file, const Options& opt) {
  if (opt.side != "left" && opt.side != "right")
    throw possfuse::ParseError("--side must be left or right");
  auto doc = possfuse::io::constraint_doc_from_json(possfuse::io::load_json_file(file), opt.tolerance);
  possfuse::Constraint result =
      possfuse::marginalize(doc.constraint, opt.side == "left" ? possfuse::Side::left
                                                               : possfuse::Side::right);
  ordered_json report;
  report["operation"] = "marginalize";
  report["inputs"] = {possfuse::io::file_digest(file)};
  report["side"] = opt.side;
  report["result"] = possfuse::io::constraint_to_json(result);
  emit_report(report, opt);
  return 0;
}

int cmd_dempster(const std::vector<std::string>& files, const Options& opt) {
  auto m = possfuse::io::mass_from_json(possfuse::io::load_json_file(files[0]), opt.tolerance);
  auto mp = possfuse::io::mass_from_json(possfuse::io::load_json_file(files[1]), opt.tolerance);

  auto [combined, conflict] = possfuse::dempster_combine(m, mp, opt.tolerance);
  auto [fused, diag] =
      possfuse::fuse(possfuse::from_mass_function(m), possfuse::from_mass_function(mp), opt.tolerance);

  const bool equal = possfuse::approx_equal(fused, possfuse::from_mass_function(combined), 1e-12) &&
                     std::abs(diag.normalizer - (1.0 - conflict)) <= 1e-12;

  ordered_json report;
  report["operation"] = "dempster";
  report["inputs"] = {possfuse::io::file_digest(files[0]), possfuse::io::file_digest(files[1])};
  report["dempster"] = possfuse::io::mass_to_json(combined);
  report["dempster"]["conflict"] = conflict;
  report["fused"] = possfuse::io::constraint_to_json(fused);
  report["diagnostics"] = diagnostics_json(diag, fused.components().size());
  report["verdict"] = equal ? "equal" : "different";
  emit_report(report, opt);
  return 0;
}

int cmd_filter(const std::string& file, const Options& opt) {
  possfuse::ScenarioConfig cfg =
      possfuse::io::scenario_from_json(possfuse::io::load_json_file(file));
  if (opt.seed_given) cfg.seed = opt.seed;
  const auto steps = possfuse::run_scenario(cfg);

  std::string csv = opt.oracle
                        ? "step,prior_mean,prior_var,obs,post_mean,post_var,weight,oracle_weight,abs_err\n"
                        : "step,prior_mean,prior_var,obs,post_mean,post_var,weight\n";
  ordered_json records = ordered_json::array();
  double max_abs_err = 0.0;
  for (const auto& s : steps) {
    ordered_json rec;
    rec["step"] = s.step;
    rec["prior_mean"] = s.prior.mean;
    rec["prior_var"] = s.prior.var;
    rec["obs"] = s.observation;
    rec["post_mean"] = s.result.posterior.mean;
    rec["post_var"] = s.result.posterior.var;
    rec["weight"] = s.result.weight;
    auto f = possfuse::io::format_double;
    csv += std::to_string(s.step) + "," + f(s.prior.mean) + "," + f(s.prior.var) + "," +
           f(s.observation) + "," + f(s.result.posterior.mean) + "," + f(s.result.posterior.var) +
           "," + f(s.result.weight);
    if (opt.oracle) {
      const double oracle_w = possfuse::quadrature_weight(s.prior, s.bound);
      const double abs_err = std::abs(oracle_w - s.result.weight);
      max_abs_err = std::max(max_abs_err, abs_err);
      rec["oracle_weight"] = oracle_w;
      rec["abs_err"] = abs_err;
      csv += "," + f(oracle_w) + "," + f(abs_err);
    }
    csv += "\n";
    records.push_back(std::move(rec));
  }

  ordered_json report;
  report["operation"] = "filter";
  report["inputs"] = {possfuse::io::file_digest(file)};
  report["oracle"] = opt.oracle;
  if (opt.oracle) report["max_abs_err"] = max_abs_err;
  report["steps"] = std::move(records);
  emit_report(report, opt);
  if (!opt.csv_path.empty()) write_text(csv, opt.csv_path);
  return 0;
}

int cmd_check(const std::string& file, const Options& opt) {
  auto doc = possfuse::io::constraint_doc_from_json(possfuse::io::load_json_file(file), opt.tolerance);
  const possfuse::Constraint& m = doc.constraint;
  const std::size_t n = m.space().size();

  ordered_json axioms;
  bool ok = true;
  if (n <= 12) {
    // Exhaustive: precompute the outer measure of every subset, then sweep
    // all pairs for monotonicity and sub-additivity.
    const std::size_t subsets = std::size_t{1} << n;
    std::vector<double> mu(subsets);
    for (std::size_t bits = 0; bits < subsets; ++bits)
      mu[bits] = possfuse::outer_measure(m, possfuse::SubsetMask::from_bits(m.space(), bits));
    const bool empty_ok = std::abs(mu[0]) <= opt.tolerance;
    std::size_t mono_bad = 0;
    std::size_t sub_bad = 0;
    for (std::size_t b = 0; b < subsets; ++b) {
      for (std::size_t a = b;; a = (a - 1) & b) {  // submasks of b
        if (mu[a] > mu[b] + opt.tolerance) ++mono_bad;
        if (a == 0) break;
      }
    }
    for (std::size_t a = 0; a < subsets; ++a)
      for (std::size_t b = 0; b < subsets; ++b)
        if (mu[a | b] > mu[a] + mu[b] + opt.tolerance) ++sub_bad;
    ok = empty_ok && mono_bad == 0 && sub_bad == 0;
    axioms["mode"] = "exhaustive";
    axioms["subsets"] = subsets;
    axioms["empty_set_ok"] = empty_ok;
    axioms["monotonicity_violations"] = mono_bad;
    axioms["subadditivity_violations"] = sub_bad;
  } else {
    // Sampled pairs only; a clean run is not a proof.
    std::mt19937_64 gen(opt.seed);
    const std::size_t pairs = 20000;
    std::size_t mono_bad = 0;
    std::size_t sub_bad = 0;
    auto random_mask = [&] {
      std::vector<bool> member(n);
      for (std::size_t i = 0; i < n; ++i) member[i] = (gen() & 1u) != 0;
      return possfuse::SubsetMask(m.space(), std::move(member));
    };
    const bool empty_ok =
        std::abs(possfuse::outer_measure(m, possfuse::SubsetMask::empty(m.space()))) <=
        opt.tolerance;
    for (std::size_t k = 0; k < pairs; ++k) {
      auto a = random_mask();
      auto b = random_mask();
      auto sub = intersect(a, b);
      if (possfuse::outer_measure(m, sub) > possfuse::outer_measure(m, a) + opt.tolerance)
        ++mono_bad;
      if (possfuse::outer_measure(m, unite(a, b)) >
          possfuse::outer_measure(m, a) + possfuse::outer_measure(m, b) + opt.tolerance)
        ++sub_bad;
    }
    ok = empty_ok && mono_bad == 0 && sub_bad == 0;
    axioms["mode"] = "sampled";
    axioms["incomplete"] = true;
    axioms["pairs"] = pairs;
    axioms["empty_set_ok"] = empty_ok;
    axioms["monotonicity_violations"] = mono_bad;
    axioms["subadditivity_violations"] = sub_bad;
  }

  ordered_json report;
  report["operation"] = "check";
  report["inputs"] = {possfuse::io::file_digest(file)};
  report["axioms"] = std::move(axioms);
  report["norm"] = possfuse::norm(m);
  report["canonical"] = m.is_canonical(opt.tolerance);
  if (doc.probability) {
    ordered_json dom;
    if (n <= 20) {
      const bool d = possfuse::dominates(m, *doc.probability, opt.tolerance);
      dom["mode"] = "exhaustive";
      dom["dominates"] = d;
      ok = ok && d;
    } else {
      auto sampled = possfuse::dominates_sampled(m, *doc.probability, 20000, opt.seed, opt.tolerance);
      dom["mode"] = "sampled";
      dom["incomplete"] = true;
      dom["samples"] = sampled.samples;
      dom["violation_found"] = sampled.violation_found;
      ok = ok && !sampled.violation_found;
    }
    report["domination"] = std::move(dom);
  }
  report["ok"] = ok;
  emit_report(report, opt);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fusion, transport, and filtering of supremum-based uncertainty on finite spaces"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--out", opt.out_path, "write the report (or the filter CSV target, see --csv) here");
  auto* seed_opt = app.add_option("--seed", opt.seed, "seed for generated observations and sampling");
  app.add_flag("--oracle", opt.oracle, "filter: add a quadrature cross-check per step");
  app.add_flag("--no-verify-kernel", opt.no_verify_kernel, "skip kernel associativity verification");
  app.add_option("--tolerance", opt.tolerance, "absolute comparison tolerance")
      ->envname("POSSFUSE_TOLERANCE");

  std::vector<std::string> fuse_files, push_files, pull_files, dempster_files;
  std::string marg_file, filter_file, check_file;

  auto* c_fuse = app.add_subcommand("fuse", "combine two constraint docs");
  c_fuse->add_option("docs", fuse_files, "two constraint docs")->expected(2)->required();
  c_fuse->add_option("--kernel", opt.kernel_path, "kernel doc; switches to general fusion");
  auto* c_push = app.add_subcommand("push", "pushforward a constraint along a map");
  c_push->add_option("files", push_files, "constraint doc and map doc")->expected(2)->required();
  auto* c_pull = app.add_subcommand("pull", "pullback a constraint along a map");
  c_pull->add_option("files", pull_files, "constraint doc and map doc")->expected(2)->required();
  auto* c_marg = app.add_subcommand("marginalize", "project a product-space constraint onto one factor");
  c_marg->add_option("doc", marg_file, "constraint doc on a product space")->required();
  c_marg->add_option("--side", opt.side, "factor to keep: left or right")->required();
  auto* c_demp = app.add_subcommand("dempster", "combine two mass functions; cross-check against fusion");
  c_demp->add_option("docs", dempster_files, "two mass-function docs")->expected(2)->required();
  auto* c_filt = app.add_subcommand("filter", "run a scenario of predict/update steps");
  c_filt->add_option("scenario", filter_file, "scenario doc")->required();
  c_filt->add_option("--csv", opt.csv_path, "also write the per-step CSV here");
  auto* c_check = app.add_subcommand("check", "verify outer-measure axioms (and domination) for a doc");
  c_check->add_option("doc", check_file, "constraint doc")->required();

  for (auto* sub : {c_fuse, c_push, c_pull, c_marg, c_demp, c_filt, c_check}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  opt.seed_given = seed_opt->count() > 0;

  try {
    if (c_fuse->parsed()) return cmd_fuse(fuse_files, opt);
    if (c_push->parsed()) return cmd_transport("push", push_files, opt);
    if (c_pull->parsed()) return cmd_transport("pull", pull_files, opt);
    if (c_marg->parsed()) return cmd_marginalize(marg_file, opt);
    if (c_demp->parsed()) return cmd_dempster(dempster_files, opt);
    if (c_filt->parsed()) return cmd_filter(filter_file, opt);
    if (c_check->parsed()) return cmd_check(check_file, opt);
  } catch (const possfuse::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const possfuse::MapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const possfuse::SpaceMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const possfuse::ZeroConstraint& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const possfuse::IncompatibleConstraints& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const possfuse::KernelNotAssociative& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
