#pragma once
// Simple zeros of a planar bifurcation function on the annulus r1 < |alpha| < r2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "pendavg/averaging.hpp"
#include "pendavg/error.hpp"

namespace pendavg {

struct ZeroResult {
  Vec2 alpha_star = Vec2::Zero();
  double residual = 0.0;
  Mat2 jacobian = Mat2::Zero();
  double det = 0.0;
  bool simple = false;
  int iterations = 0;
  std::vector<double> residual_history;  // |G| at each Newton iterate, seed first
};

struct ZeroSearchOptions {
  double r1 = 1e-2;
  double r2 = 50.0;
  int radial_seeds = 24;
  int angular_seeds = 24;
  double zero_tolerance = 1e-11;
  int max_iterations = 25;
  double simplicity_threshold = 1e-8;
  double dedup_radius = 1e-6;
  int jobs = 1;

  void validate() const {
    if (!(r1 > 0.0)) throw ConfigError("annulus inner radius r1 must be positive (the origin is excluded)");
    if (!(r2 > r1)) throw ConfigError("annulus outer radius r2 must exceed r1");
    if (radial_seeds < 1 || angular_seeds < 1) throw ConfigError("seed grid must be at least 1 x 1");
    if (!(zero_tolerance > 0.0)) throw ConfigError("zero tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("max Newton iterations must be at least 1");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
  }
};

struct ZeroSearch {
  std::vector<ZeroResult> zeros;  // sorted lexicographically by alpha
  bool identically_zero = false;  // G vanished at every seed
};

/// Polar seed grid: geometric radii across the annulus, offset angles.
inline std::vector<Vec2> polar_seeds(const ZeroSearchOptions& opts) {
  std::vector<Vec2> seeds;
  seeds.reserve(static_cast<std::size_t>(opts.radial_seeds) * opts.angular_seeds);
  const double ratio = opts.r2 / opts.r1;
  for (int i = 0; i < opts.radial_seeds; ++i) {
    const double r = opts.r1 * std::pow(ratio, (i + 0.5) / opts.radial_seeds);
    for (int j = 0; j < opts.angular_seeds; ++j) {
      const double theta = 2.0 * std::numbers::pi * (j + 0.25) / opts.angular_seeds;
      seeds.emplace_back(r * std::cos(theta), r * std::sin(theta));
    }
  }
  return seeds;
}

/// Damped Newton from one seed. Returns nothing when the iteration stalls,
/// leaves the search region, or meets a singular Jacobian.
inline std::optional<ZeroResult> newton_zero(const AveragedSystem& system, const Vec2& seed,
                                             const ZeroSearchOptions& opts) {
  ZeroResult result;
  Vec2 x = seed;
  Vec2 g = system(x);
  double res = g.norm();
  result.residual_history.push_back(res);
  int iter = 0;
  while (res > opts.zero_tolerance) {
    if (iter >= opts.max_iterations) return std::nullopt;
    const Mat2 J = system.jacobian(x);
    const double det = J.determinant();
    const double scale = J.cwiseAbs().maxCoeff();
    if (!std::isfinite(det) || std::abs(det) <= 1e-14 * scale * scale) return std::nullopt;
    const Vec2 step = -J.partialPivLu().solve(g);
    double lambda = 1.0;
    bool improved = false;
    Vec2 xn, gn;
    for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
      xn = x + lambda * step;
      gn = system(xn);
      if (gn.norm() < res) {
        improved = true;
        break;
      }
    }
    if (!improved) return std::nullopt;
    x = xn;
    g = gn;
    res = g.norm();
    ++iter;
    result.residual_history.push_back(res);
    if (x.norm() > 10.0 * opts.r2) return std::nullopt;
  }
  result.alpha_star = x;
  result.residual = res;
  result.iterations = iter;
  result.jacobian = system.jacobian(x);
  result.det = result.jacobian.determinant();
  result.simple = std::abs(result.det) > opts.simplicity_threshold && res <= opts.zero_tolerance;
  return result;
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += static_cast<std::size_t>(jobs)) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Newton from every seed of the polar grid; converged zeros inside the open
/// annulus are deduplicated and sorted lexicographically by alpha. Seeds whose
/// iteration hits an expression domain error are abandoned.
inline ZeroSearch find_zeros(const AveragedSystem& system, const ZeroSearchOptions& opts = {}) {
  opts.validate();
  const std::vector<Vec2> seeds = polar_seeds(opts);
  std::vector<std::optional<ZeroResult>> outcomes(seeds.size());
  std::vector<double> seed_residuals(seeds.size(), 0.0);

  detail::parallel_for(seeds.size(), opts.jobs, [&](std::size_t i) {
    try {
      seed_residuals[i] = system(seeds[i]).norm();
      outcomes[i] = newton_zero(system, seeds[i], opts);
    } catch (const EvalError&) {
      seed_residuals[i] = std::numeric_limits<double>::infinity();
      outcomes[i].reset();
    }
  });

  ZeroSearch search;
  if (std::all_of(seed_residuals.begin(), seed_residuals.end(),
                  [&](double r) { return r <= opts.zero_tolerance; })) {
    search.identically_zero = true;
    return search;
  }

  for (auto& outcome : outcomes) {
    if (!outcome) continue;
    const double radius = outcome->alpha_star.norm();
    if (!(radius > opts.r1 && radius < opts.r2)) continue;
    auto same = std::find_if(search.zeros.begin(), search.zeros.end(), [&](const ZeroResult& z) {
      return (z.alpha_star - outcome->alpha_star).norm() < opts.dedup_radius;
    });
    if (same == search.zeros.end()) search.zeros.push_back(std::move(*outcome));
    else if (outcome->residual < same->residual) *same = std::move(*outcome);
  }
  // First coordinates are compared on the dedup grid so that roundoff around
  // zero does not decide the order.
  const double q = opts.dedup_radius > 0.0 ? opts.dedup_radius : 1e-12;
  auto key = [q](const ZeroResult& z) { return std::llround(z.alpha_star(0) / q); };
  std::sort(search.zeros.begin(), search.zeros.end(), [&](const ZeroResult& a, const ZeroResult& b) {
    if (key(a) != key(b)) return key(a) < key(b);
    return a.alpha_star(1) < b.alpha_star(1);
  });
  return search;
}

/// Indices into the zero list that describe one unperturbed orbit: alpha and
/// -alpha are the same orbit started half a period apart.
struct OrbitClass {
  std::vector<std::size_t> members;
};

inline std::vector<OrbitClass> antipodal_pairing(const std::vector<ZeroResult>& zeros, double radius = 1e-6) {
  std::vector<OrbitClass> classes;
  std::vector<bool> assigned(zeros.size(), false);
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    if (assigned[i]) continue;
    OrbitClass cls{{i}};
    assigned[i] = true;
    for (std::size_t j = i + 1; j < zeros.size(); ++j) {
      if (!assigned[j] && (zeros[i].alpha_star + zeros[j].alpha_star).norm() < radius) {
        cls.members.push_back(j);
        assigned[j] = true;
      }
    }
    classes.push_back(std::move(cls));
  }
  return classes;
}

}  // namespace pendavg
