#pragma once

// Separation certificate for a plant G in feedback with an operator phi
// whose scaled graph lies in a known bound: gain_bound = 1 / dist(SRG'(G)^-1, -SG(phi)).

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "srg/complex_sets.hpp"
#include "srg/errors.hpp"
#include "srg/lti.hpp"
#include "srg/reset_system.hpp"

namespace srg {

/// Plant-side geometry, computed once per (plant, grid) and shared.
struct PlantGeometry {
  TransferFunction plant;
  NyquistOptions options;
  ExtendedSRG esrg;
  Region inverted;
  std::vector<Complex> poles;
};

inline std::shared_ptr<const PlantGeometry> make_plant_geometry(const TransferFunction& g,
                                                                const NyquistOptions& opt = {}) {
  auto geom = std::make_shared<PlantGeometry>();
  geom->plant = g;
  geom->options = opt;
  geom->esrg = extended_srg(g, opt);
  geom->inverted = inverted_extended_srg(geom->esrg);
  geom->poles = poles(g);
  return geom;
}

struct CertificateReport {
  bool gain_finite = false;
  bool chord_ok = false;
  std::string chord_source;  // "controller" or "plant"
  bool star_ok = false;
  Complex kappa{};
  double separation = 0.0;
  double gain_bound = kInfinity;
  bool well_posedness_assumed = true;
  bool certified = false;
  std::string verdict;  // "certified", "not_certified", "inconclusive"
  std::string diagnosis;
  int n_p = 0;
  Region inverted_srg;
  Region negated_bound;
};

inline CertificateReport certify(const PlantGeometry& geom, const SgBound& bound) {
  CertificateReport r;
  r.kappa = bound.kappa;
  r.n_p = geom.esrg.n_p;
  r.inverted_srg = geom.inverted;
  r.negated_bound = scale_region(bound.shape, -1.0);
  try {
    r.gain_finite = std::isfinite(region_radius(bound.shape));
    if (has_chord_property(bound.shape)) {
      r.chord_ok = true;
      r.chord_source = "controller";
    } else if (has_chord_property(geom.inverted)) {
      r.chord_ok = true;
      r.chord_source = "plant";
    }
    r.star_ok = is_star_shaped_about(bound.shape, bound.kappa);
    r.separation = region_distance(r.inverted_srg, r.negated_bound);
  } catch (const UnderSampledContour& e) {
    r.verdict = "inconclusive";
    r.diagnosis = std::string("inconclusive - refine grid: ") + e.what();
    return r;
  }
  r.gain_bound = r.separation > 0.0 ? 1.0 / r.separation : kInfinity;
  r.certified = r.gain_finite && r.chord_ok && r.star_ok && r.separation > 0.0;
  r.verdict = r.certified ? "certified" : "not_certified";
  if (!r.certified) {
    if (!r.gain_finite) r.diagnosis = "controller bound is unbounded";
    else if (!r.chord_ok) r.diagnosis = "neither graph has the chord property";
    else if (!r.star_ok) r.diagnosis = "controller bound is not star-shaped about kappa";
    else r.diagnosis = "inverted plant SRG meets the negated controller bound";
  }
  return r;
}

inline CertificateReport certify(const TransferFunction& g, const SgBound& bound, const NyquistOptions& opt = {}) {
  try {
    return certify(*make_plant_geometry(g, opt), bound);
  } catch (const UnderSampledContour& e) {
    CertificateReport r;
    r.kappa = bound.kappa;
    r.verdict = "inconclusive";
    r.diagnosis = std::string("inconclusive - refine grid: ") + e.what();
    return r;
  }
}

/// kappa + tau (shape - kappa).
inline Region shrink_toward(const Region& shape, Complex kappa, double tau) {
  return translate_region(scale_region(translate_region(shape, -kappa.real()), tau), kappa.real());
}

/// Separation stays positive along the homotopy kappa + tau (bound - kappa).
inline bool tau_sweep_check(const PlantGeometry& geom, const SgBound& bound, const std::vector<double>& taus) {
  if (taus.empty()) throw InputError("taus: list is empty");
  for (double tau : taus) {
    if (!(tau > 0.0 && tau <= 1.0)) throw InputError("taus: every value must lie in (0, 1]");
  }
  for (double tau : taus) {
    const Region member = scale_region(shrink_toward(bound.shape, bound.kappa, tau), -1.0);
    if (!(region_distance(geom.inverted, member) > 0.0)) return false;
  }
  return true;
}

inline std::vector<double> default_taus() {
  std::vector<double> out;
  for (int k = 1; k <= 10; ++k) out.push_back(0.1 * k);
  return out;
}

}  // namespace srg
