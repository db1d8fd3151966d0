#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "possfuse/bound_fn.hpp"
#include "possfuse/common.hpp"
#include "possfuse/constraint.hpp"
#include "possfuse/fusion.hpp"

namespace possfuse {

/// Scalar Gaussian belief.
struct GaussPrior {
  double mean = 0.0;
  double var = 1.0;
};

/// Gaussian-shaped observation bound exp(-(H x - z)^2 / (2 sigma^2)); the
/// peak value is exactly 1, so it bounds rather than weighs.
struct GaussBound {
  double z = 0.0;
  double obs_coeff = 1.0;
  double sigma = 1.0;
};

struct AssimilationResult {
  GaussPrior posterior;
  /// Integral of the bound against the prior; a probability in (0, 1].
  double weight = 0.0;
};

inline void validate(const GaussPrior& p) {
  if (!(p.var > 0.0)) throw std::invalid_argument("prior variance must be positive");
}

inline void validate(const GaussBound& b) {
  if (!(b.sigma > 0.0)) throw std::invalid_argument("observation sigma must be positive");
}

/// One observation update. The association weight is
/// (sigma / s) exp(-(H m - z)^2 / (2 s^2)) with s^2 = H^2 P + sigma^2 --
/// dimensionless, in (0, 1] -- while the posterior follows the standard
/// scalar Kalman algebra, so the filtering recursion is unchanged.
inline AssimilationResult assimilate(const GaussPrior& prior, const GaussBound& bound) {
  validate(prior);
  validate(bound);
  const double h = bound.obs_coeff;
  const double s2 = h * h * prior.var + bound.sigma * bound.sigma;
  const double innovation = bound.z - h * prior.mean;
  const double weight = (bound.sigma / std::sqrt(s2)) * std::exp(-innovation * innovation / (2.0 * s2));
  const double gain = prior.var * h / s2;
  AssimilationResult out;
  out.posterior.mean = prior.mean + gain * innovation;
  out.posterior.var = (1.0 - gain * h) * prior.var;
  out.weight = weight;
  return out;
}

/// Trapezoidal evaluation of the association weight over 2001 points
/// spanning mean +- 10 combined standard deviations. Shares no algebra with
/// assimilate(); used to cross-check it.
inline double quadrature_weight(const GaussPrior& prior, const GaussBound& bound,
                                std::size_t points = 2001) {
  validate(prior);
  validate(bound);
  const double sd = std::sqrt(prior.var);
  const double h = bound.obs_coeff;
  const double spread =
      h != 0.0 ? std::sqrt(prior.var + (bound.sigma / h) * (bound.sigma / h)) : sd;
  const double lo = prior.mean - 10.0 * spread;
  const double hi = prior.mean + 10.0 * spread;
  const double dx = (hi - lo) / static_cast<double>(points - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + dx * static_cast<double>(i);
    const double d = h * x - bound.z;
    const double bound_v = std::exp(-d * d / (2.0 * bound.sigma * bound.sigma));
    const double prior_v =
        std::exp(-(x - prior.mean) * (x - prior.mean) / (2.0 * prior.var)) /
        (sd * std::sqrt(2.0 * 3.14159265358979323846));
    const double v = bound_v * prior_v;
    sum += (i == 0 || i + 1 == points) ? 0.5 * v : v;
  }
  return sum * dx;
}

/// Exact discrete Bayes update of a tabulated prior against a bound, done
/// through the fusion machinery. Returns the posterior and the weight
/// sum_x f(x) p(x). Throws IncompatibleConstraints on zero weight.
inline std::pair<DiscreteProbability, double> assimilate_on_grid(const DiscreteProbability& prior,
                                                                 const BoundFn& bound,
                                                                 double tol = kDefaultTolerance) {
  auto [fused, diag] = fuse(from_probability(prior), Constraint::single(bound), tol);
  std::vector<double> weights(prior.space().size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i)
    weights[i] = outer_measure(fused, SubsetMask::singleton(prior.space(), i));
  return {DiscreteProbability(prior.space(), std::move(weights), 1e-6), diag.normalizer};
}

/// Linear-Gaussian scenario with a finite-resolution or point sensor.
struct ScenarioConfig {
  int steps = 1;
  double dyn_a = 1.0;
  double process_noise_q = 0.0;
  double obs_coeff = 1.0;
  double sensor_sigma = 1.0;
  /// Present: observations are reported as cells of this width and
  /// assimilated against a bound centered on the cell.
  std::optional<double> cell_width;
  /// Bound width for cell observations; defaults to cell_width / sqrt(12),
  /// the standard deviation of a uniform draw from the cell.
  std::optional<double> cell_sigma;
  GaussPrior initial;
  /// Raw observations; generated from `seed` when absent.
  std::optional<std::vector<double>> observations;
  std::optional<std::uint64_t> seed;
};

struct ScenarioStep {
  int step = 0;
  GaussPrior prior;  // after predict, before the update
  double observation = 0.0;
  AssimilationResult result;
  GaussBound bound;
};

inline void validate(const ScenarioConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("scenario needs at least one step");
  if (!(cfg.process_noise_q >= 0.0)) throw std::invalid_argument("process noise must be >= 0");
  if (!(cfg.sensor_sigma > 0.0)) throw std::invalid_argument("sensor sigma must be positive");
  if (cfg.cell_width && !(*cfg.cell_width > 0.0))
    throw std::invalid_argument("cell width must be positive");
  if (cfg.cell_sigma && !(*cfg.cell_sigma > 0.0))
    throw std::invalid_argument("cell sigma must be positive");
  validate(cfg.initial);
  if (cfg.observations) {
    if (static_cast<int>(cfg.observations->size()) != cfg.steps)
      throw std::invalid_argument("observation sequence length must equal the step count");
  } else if (!cfg.seed) {
    throw std::invalid_argument("scenario needs either observations or a generation seed");
  }
}

namespace detail {

// Box-Muller on top of mt19937_64. std::normal_distribution is
// implementation-defined, which would break byte-stable outputs.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (cached_) {
      cached_ = false;
      return cache_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    cache_ = r * std::sin(a);
    cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  bool cached_ = false;
  double cache_ = 0.0;
};

}  // namespace detail

/// Alternates a linear-Gaussian predict with an observation update. In
/// finite-resolution mode each raw observation is snapped to its cell and
/// assimilated against a bound centered on the cell. Deterministic under a
/// fixed seed.
inline std::vector<ScenarioStep> run_scenario(const ScenarioConfig& cfg) {
  validate(cfg);

  std::vector<double> observations;
  if (cfg.observations) {
    observations = *cfg.observations;
  } else {
    detail::GaussianRng rng(*cfg.seed);
    double truth = cfg.initial.mean + std::sqrt(cfg.initial.var) * rng.normal();
    for (int n = 0; n < cfg.steps; ++n) {
      truth = cfg.dyn_a * truth + std::sqrt(cfg.process_noise_q) * rng.normal();
      observations.push_back(cfg.obs_coeff * truth + cfg.sensor_sigma * rng.normal());
    }
  }

  std::vector<ScenarioStep> out;
  out.reserve(static_cast<std::size_t>(cfg.steps));
  GaussPrior current = cfg.initial;
  for (int n = 0; n < cfg.steps; ++n) {
    GaussPrior predicted;
    predicted.mean = cfg.dyn_a * current.mean;
    predicted.var = cfg.dyn_a * cfg.dyn_a * current.var + cfg.process_noise_q;

    const double raw = observations[static_cast<std::size_t>(n)];
    GaussBound bound;
    bound.obs_coeff = cfg.obs_coeff;
    if (cfg.cell_width) {
      const double w = *cfg.cell_width;
      const double center = (std::floor(raw / w) + 0.5) * w;
      bound.z = center;
      bound.sigma = cfg.cell_sigma ? *cfg.cell_sigma : w / std::sqrt(12.0);
    } else {
      bound.z = raw;
      bound.sigma = cfg.sensor_sigma;
    }

    ScenarioStep step;
    step.step = n + 1;
    step.prior = predicted;
    step.observation = bound.z;
    step.bound = bound;
    step.result = assimilate(predicted, bound);
    out.push_back(step);
    current = step.result.posterior;
  }
  return out;
}

}  // namespace possfuse
