#pragma once

// Gain search for C(kp, kr) = kp + kr R against a target bound gamma_hat:
// dist(SRG'(G)^-1, -kp - kr S) >= 1 / gamma_hat.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "srg/analysis.hpp"
#include "srg/errors.hpp"
#include "srg/reset_system.hpp"

namespace srg {

inline constexpr double kFeasibilityTolerance = 1e-9;
inline constexpr double kSearchResolution = 1e-3;
inline constexpr double kFallbackResolution = 1e-2;
inline constexpr int kPrescanPoints = 21;

struct Feasibility {
  bool feasible = false;
  double separation = 0.0;
  CertificateReport report;
};

inline double required_separation(double gamma_hat) {
  if (std::isnan(gamma_hat) || !(gamma_hat > 0.0)) throw InputError("gamma_hat: must be positive");
  return std::isinf(gamma_hat) ? 0.0 : 1.0 / gamma_hat;
}

inline Feasibility feasibility(const PlantGeometry& geom, double kp, double kr, double gamma_hat) {
  const double need = required_separation(gamma_hat);
  Feasibility f;
  f.report = certify(geom, controller_sg_bound(kp, kr));
  f.separation = f.report.separation;
  f.feasible = f.report.certified && f.separation >= need - kFeasibilityTolerance;
  return f;
}

struct TracePoint {
  double kp = 0.0;
  double kr = 0.0;
  double separation = 0.0;
  bool feasible = false;
};

struct DesignReport {
  std::string mode;    // "min_kp" or "max_abs_kr"
  std::string method;  // "bisection", "grid", "prescan"
  double gamma_hat = 1.0;
  double kp = std::nan("");
  double kr = std::nan("");
  double separation = 0.0;
  double gain_bound = kInfinity;
  bool feasible = false;
  std::vector<TracePoint> trace;
  CertificateReport certificate;  // of the returned point; carries the plot regions
  std::string diagnosis;
};

namespace detail {

class Evaluator {
 public:
  Evaluator(const PlantGeometry& geom, double gamma_hat, DesignReport& report)
      : geom_(geom), gamma_hat_(gamma_hat), report_(report) {}

  bool operator()(double kp, double kr) {
    Feasibility f = feasibility(geom_, kp, kr, gamma_hat_);
    report_.trace.push_back({kp, kr, f.separation, f.feasible});
    return f.feasible;
  }

  void finish(double kp, double kr) {
    Feasibility f = feasibility(geom_, kp, kr, gamma_hat_);
    report_.kp = kp;
    report_.kr = kr;
    report_.separation = f.separation;
    report_.gain_bound = f.report.gain_bound;
    report_.feasible = f.feasible;
    report_.certificate = std::move(f.report);
  }

 private:
  const PlantGeometry& geom_;
  double gamma_hat_;
  DesignReport& report_;
};

}  // namespace detail

/// Smallest kp in [kp_lo, kp_hi] meeting the target for fixed kr.
inline DesignReport find_min_kp(const PlantGeometry& geom, double kr, double gamma_hat, double kp_lo = 0.0,
                                double kp_hi = 10.0) {
  required_separation(gamma_hat);
  if (!(kp_lo <= kp_hi) || !std::isfinite(kp_lo) || !std::isfinite(kp_hi)) {
    throw InputError("kp_range: need a finite interval with lo <= hi");
  }
  DesignReport rep;
  rep.mode = "min_kp";
  rep.gamma_hat = gamma_hat;
  detail::Evaluator eval(geom, gamma_hat, rep);

  const int n = kp_lo == kp_hi ? 1 : kPrescanPoints;
  std::vector<double> grid(n);
  std::vector<bool> ok(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = n == 1 ? kp_lo : kp_lo + (kp_hi - kp_lo) * i / (n - 1);
    ok[i] = eval(grid[i], kr);
  }
  const auto first = std::find(ok.begin(), ok.end(), true);
  if (first == ok.end()) {
    rep.method = "prescan";
    rep.diagnosis = "no feasible kp in range";
    eval.finish(kp_hi, kr);
    rep.feasible = false;
    return rep;
  }
  const auto i = static_cast<int>(first - ok.begin());
  const bool monotone = std::all_of(first, ok.end(), [](bool b) { return b; });

  if (!monotone) {
    rep.method = "grid";
    const int steps = static_cast<int>(std::ceil((kp_hi - kp_lo) / kFallbackResolution));
    for (int k = 0; k <= steps; ++k) {
      const double kp = std::min(kp_lo + k * kFallbackResolution, kp_hi);
      if (eval(kp, kr)) {
        eval.finish(kp, kr);
        return rep;
      }
    }
    eval.finish(grid[i], kr);
    return rep;
  }

  rep.method = "bisection";
  if (i == 0) {
    eval.finish(grid[0], kr);
    return rep;
  }
  double bad = grid[i - 1];
  double good = grid[i];
  while (good - bad > kSearchResolution) {
    const double mid = 0.5 * (bad + good);
    (eval(mid, kr) ? good : bad) = mid;
  }
  eval.finish(good, kr);
  return rep;
}

enum class KrDirection { negative, positive, both };

/// Largest |kr| up to kr_max keeping the target, searched outward from kr = 0.
inline DesignReport find_max_abs_kr(const PlantGeometry& geom, double kp, double gamma_hat,
                                    KrDirection direction = KrDirection::both, double kr_max = 10.0) {
  required_separation(gamma_hat);
  if (!(kr_max >= 0.0) || !std::isfinite(kr_max)) throw InputError("kr_range: bound must be finite and >= 0");
  DesignReport rep;
  rep.mode = "max_abs_kr";
  rep.method = "bisection";
  rep.gamma_hat = gamma_hat;
  detail::Evaluator eval(geom, gamma_hat, rep);

  if (!eval(kp, 0.0)) {
    rep.diagnosis = "kr = 0 is infeasible for this kp";
    eval.finish(kp, 0.0);
    rep.feasible = false;
    return rep;
  }

  auto search = [&](double sign) {
    if (kr_max == 0.0) return 0.0;
    double good = 0.0;
    double bad = kInfinity;
    for (int k = 1; k < kPrescanPoints; ++k) {
      const double kr = kr_max * k / (kPrescanPoints - 1);
      if (!eval(kp, sign * kr)) {
        bad = kr;
        break;
      }
      good = kr;
    }
    if (std::isinf(bad)) return good;
    while (bad - good > kSearchResolution) {
      const double mid = 0.5 * (good + bad);
      (eval(kp, sign * mid) ? good : bad) = mid;
    }
    return good;
  };

  double best = 0.0;
  if (direction != KrDirection::positive) best = -search(-1.0);
  if (direction != KrDirection::negative) {
    const double pos = search(1.0);
    if (pos > std::abs(best)) best = pos;
  }
  eval.finish(kp, best);
  return rep;
}

}  // namespace srg
