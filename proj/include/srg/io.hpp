#pragma once

// JSON documents for plants, reset systems, regions, reports and
// trajectories, plus the trajectory CSV format.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "srg/analysis.hpp"
#include "srg/design.hpp"
#include "srg/errors.hpp"
#include "srg/lti.hpp"
#include "srg/reset_system.hpp"
#include "srg/simulator.hpp"

namespace srg::io {

using nlohmann::json;

inline constexpr std::size_t kBoundaryPoints = 2048;
inline constexpr std::size_t kTrajectoryPoints = 5000;

/// Non-finite numbers become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json point(Complex z) { return json::array({number(z.real()), number(z.imag())}); }

inline json polyline(const std::vector<Complex>& pts) {
  json out = json::array();
  for (const Complex z : pts) {
    if (is_finite(z)) out.push_back(point(z));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reading helpers

namespace detail {

inline const json& field(const json& j, const std::string& name) {
  if (!j.is_object()) throw InputError("document: expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw InputError(name + ": missing field");
  return *it;
}

inline double real_value(const json& j, const std::string& name) {
  if (!j.is_number()) throw InputError(name + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(name + ": must be finite");
  return v;
}

inline std::vector<double> real_list(const json& j, const std::string& name) {
  if (!j.is_array()) throw InputError(name + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(real_value(j[i], name + "[" + std::to_string(i) + "]"));
  return out;
}

inline Eigen::MatrixXd matrix(const json& j, const std::string& name) {
  if (!j.is_array()) throw InputError(name + ": expected a nested array");
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const bool nested = j[0].is_array();
  if (!nested) {
    const auto v = real_list(j, name);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = real_list(j[r], name + "[" + std::to_string(r) + "]");
    if (row.size() != cols) throw InputError(name + "[" + std::to_string(r) + "]: ragged row");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

inline Eigen::VectorXd vector(const json& j, const std::string& name) {
  const Eigen::MatrixXd m = matrix(j, name);
  if (m.rows() == 1) return m.transpose();
  if (m.cols() == 1 || m.size() == 0) return m;
  throw InputError(name + ": expected a vector");
}

inline Complex complex_value(const json& j, const std::string& name) {
  if (j.is_number()) return {real_value(j, name), 0.0};
  const auto v = real_list(j, name);
  if (v.size() != 2) throw InputError(name + ": expected [re, im]");
  return {v[0], v[1]};
}

inline std::vector<Complex> complex_list(const json& j, const std::string& name) {
  if (!j.is_array()) throw InputError(name + ": expected an array of [re, im] pairs");
  std::vector<Complex> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex_value(j[i], name + "[" + std::to_string(i) + "]"));
  return out;
}

inline json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

inline json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace detail

inline json parse(const std::string& text, const std::string& what = "document") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(what + ": malformed JSON (" + e.what() + ")");
  }
}

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

inline void write_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot write file");
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Plants and reset systems

inline TransferFunction plant_from_json(const json& j) {
  return TransferFunction(detail::real_list(detail::field(j, "num"), "num"),
                          detail::real_list(detail::field(j, "den"), "den"));
}

inline json plant_to_json(const TransferFunction& g) { return {{"num", g.num}, {"den", g.den}}; }

inline ResetSystem reset_system_from_json(const json& j) {
  ResetSystem sys;
  sys.A = detail::matrix(detail::field(j, "A"), "A");
  sys.B = detail::vector(detail::field(j, "B"), "B");
  sys.C = detail::vector(detail::field(j, "C"), "C").transpose();
  sys.D = detail::real_value(detail::field(j, "D"), "D");
  sys.RJ = detail::matrix(detail::field(j, "RJ"), "RJ");
  sys.M = detail::matrix(detail::field(j, "M"), "M");
  sys.validate();
  return sys;
}

inline json reset_system_to_json(const ResetSystem& sys) {
  return {{"A", detail::matrix_json(sys.A)},
          {"B", detail::vector_json(sys.B)},
          {"C", detail::vector_json(sys.C.transpose())},
          {"D", sys.D},
          {"RJ", detail::matrix_json(sys.RJ)},
          {"M", detail::matrix_json(sys.M)}};
}

// ---------------------------------------------------------------------------
// Regions

inline json region_to_json(const Region& r, bool with_boundary = true);

namespace detail {

inline json shape_params(const Region& r) {
  json j = {{"kind", std::string(r.kind_name())}};
  if (const auto* d = r.as<shapes::Disc>()) {
    j["center"] = d->center;
    j["radius"] = d->radius;
  } else if (const auto* h = r.as<shapes::HalfDiscUnion>()) {
    j["r_right"] = h->r_right;
    j["r_left"] = h->r_left;
  } else if (const auto* t = r.as<shapes::TranslatedScaled>()) {
    j["offset"] = point(t->offset);
    j["factor"] = t->factor;
    j["base"] = region_to_json(t->base, false);
  } else if (const auto* inv = r.as<shapes::Inverted>()) {
    j["base"] = region_to_json(inv->base, false);
  } else if (const auto* hull = r.as<shapes::HConvexHull>()) {
    json v = json::array();
    for (const auto& p : hull->vertices) v.push_back({p.x, p.rho});
    j["lifted_vertices"] = v;
  } else if (const auto* e = r.as<shapes::Encircled>()) {
    j["n_poles"] = e->n_poles;
    j["contour"] = polyline(e->contour->points);
  } else if (const auto* s = r.as<shapes::Sampled>()) {
    json rings = json::array();
    for (const auto& ring : s->rings) rings.push_back(polyline(ring));
    j["rings"] = rings;
    j["closure_under_conjugation"] = s->conjugate_closed;
  } else if (const auto* u = r.as<shapes::Union>()) {
    json parts = json::array();
    for (const auto& p : u->parts) parts.push_back(region_to_json(p, false));
    j["parts"] = parts;
  }
  return j;
}

}  // namespace detail

/// {"kind", parameters..., "unbounded", "boundary": [[re, im], ...], "pieces": [...]}
inline json region_to_json(const Region& r, bool with_boundary) {
  json j = detail::shape_params(r);
  j["unbounded"] = contains_infinity(r);
  if (with_boundary) {
    json pieces = json::array();
    std::vector<Complex> all;
    const auto parts = boundary_pieces(r);
    const std::size_t per_piece = std::max<std::size_t>(16, kBoundaryPoints / std::max<std::size_t>(1, parts.size()));
    for (const auto& piece : parts) {
      std::vector<Complex> pts;
      const int n = std::min<int>(std::max(piece.initial_samples, 2), static_cast<int>(per_piece));
      for (int i = 0; i < (piece.initial_samples == 1 ? 1 : n); ++i) {
        const Complex z = piece.at(n == 1 ? 0.0 : static_cast<double>(i) / (n - 1));
        if (is_finite(z)) pts.push_back(z);
      }
      all.insert(all.end(), pts.begin(), pts.end());
      pieces.push_back(polyline(pts));
    }
    j["boundary"] = polyline(srg::detail::thin(all, kBoundaryPoints));
    j["pieces"] = pieces;
  }
  return j;
}

inline Region region_from_json(const json& j) {
  const std::string kind = [&] {
    const json& k = detail::field(j, "kind");
    if (!k.is_string()) throw InputError("kind: expected a string");
    return k.get<std::string>();
  }();
  if (kind == "empty") return make_empty();
  if (kind == "disc") {
    return make_disc(detail::real_value(detail::field(j, "center"), "center"),
                     detail::real_value(detail::field(j, "radius"), "radius"));
  }
  if (kind == "half_disc_union") {
    return make_half_disc_union(detail::real_value(detail::field(j, "r_right"), "r_right"),
                                detail::real_value(detail::field(j, "r_left"), "r_left"));
  }
  if (kind == "translated_scaled") {
    const Complex offset = detail::complex_value(detail::field(j, "offset"), "offset");
    const double factor = detail::real_value(detail::field(j, "factor"), "factor");
    if (offset.imag() != 0.0) throw InputError("offset: must be real to keep the region conjugate-symmetric");
    if (factor == 0.0) throw InputError("factor: must be nonzero");
    return Region::make(shapes::TranslatedScaled{region_from_json(detail::field(j, "base")), offset.real(), factor});
  }
  if (kind == "inverted") return Region::make(shapes::Inverted{region_from_json(detail::field(j, "base"))});
  if (kind == "h_convex_hull") {
    const json& v = detail::field(j, "lifted_vertices");
    if (!v.is_array()) throw InputError("lifted_vertices: expected an array");
    std::vector<Lifted> verts;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto p = detail::real_list(v[i], "lifted_vertices[" + std::to_string(i) + "]");
      if (p.size() != 2) throw InputError("lifted_vertices[" + std::to_string(i) + "]: expected [x, rho]");
      verts.push_back({p[0], p[1]});
    }
    return Region::make(shapes::HConvexHull{std::move(verts)});
  }
  if (kind == "encircled") {
    auto contour = std::make_shared<const ClosedPolyline>(detail::complex_list(detail::field(j, "contour"), "contour"));
    const json& np = detail::field(j, "n_poles");
    if (!np.is_number_integer()) throw InputError("n_poles: expected an integer");
    return make_encircled(contour, np.get<int>());
  }
  if (kind == "sampled") {
    std::vector<std::vector<Complex>> rings;
    if (j.contains("rings")) {
      const json& rs = j["rings"];
      if (!rs.is_array()) throw InputError("rings: expected an array of polylines");
      for (std::size_t i = 0; i < rs.size(); ++i) {
        rings.push_back(detail::complex_list(rs[i], "rings[" + std::to_string(i) + "]"));
      }
    } else {
      rings.push_back(detail::complex_list(detail::field(j, "boundary"), "boundary"));
    }
    const bool unbounded = j.value("unbounded", false);
    const bool closure = j.value("closure_under_conjugation", true);
    return make_sampled(std::move(rings), unbounded, closure);
  }
  if (kind == "union") {
    const json& ps = detail::field(j, "parts");
    if (!ps.is_array()) throw InputError("parts: expected an array");
    std::vector<Region> parts;
    for (const auto& p : ps) parts.push_back(region_from_json(p));
    return make_union(std::move(parts));
  }
  throw InputError("kind: unknown region kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Reports

inline json report_to_json(const CertificateReport& r, bool with_regions = false) {
  json j = {
      {"verdict", r.verdict},
      {"certified", r.certified},
      {"separation", number(r.separation)},
      {"gain_bound", number(r.gain_bound)},
      {"n_p", r.n_p},
      {"conditions",
       {{"gain_finite", r.gain_finite},
        {"chord_property", r.chord_ok},
        {"chord_source", r.chord_source},
        {"star_shaped", r.star_ok},
        {"kappa", point(r.kappa)}}},
      {"well_posedness_assumed", r.well_posedness_assumed},
      {"diagnosis", r.diagnosis},
  };
  if (with_regions) j["regions"] = {{"inverted_srg", region_to_json(r.inverted_srg)},
                                    {"negated_bound", region_to_json(r.negated_bound)}};
  return j;
}

inline json regions_to_json(const CertificateReport& r) {
  return {{"inverted_srg", region_to_json(r.inverted_srg)}, {"negated_bound", region_to_json(r.negated_bound)}};
}

inline json design_to_json(const DesignReport& d, bool with_regions = false) {
  json trace = json::array();
  for (const auto& p : d.trace) {
    trace.push_back({{"kp", p.kp}, {"kr", p.kr}, {"separation", number(p.separation)}, {"feasible", p.feasible}});
  }
  json j = {{"mode", d.mode},
            {"method", d.method},
            {"gamma_hat", number(d.gamma_hat)},
            {"kp", number(d.kp)},
            {"kr", number(d.kr)},
            {"separation", number(d.separation)},
            {"gain_bound", number(d.gain_bound)},
            {"feasible", d.feasible},
            {"diagnosis", d.diagnosis},
            {"certificate", report_to_json(d.certificate)},
            {"search_trace", trace}};
  if (with_regions) j["plot_payload"] = regions_to_json(d.certificate);
  return j;
}

inline json nyquist_to_json(const PlantGeometry& g) {
  json poles = json::array();
  for (const Complex p : g.poles) poles.push_back(point(p));
  json freqs = json::array();
  for (double f : g.esrg.contour.frequencies) freqs.push_back(number(f));
  json indent = json::array();
  for (const Complex p : g.esrg.contour.indentations) indent.push_back(point(p));
  return {{"plant", plant_to_json(g.plant)},
          {"n_p", g.esrg.n_p},
          {"poles", poles},
          {"omega_max", g.esrg.contour.omega_max},
          {"contour", polyline(g.esrg.contour.samples)},
          {"frequencies", freqs},
          {"indentations", indent},
          {"hull", region_to_json(g.esrg.hull)},
          {"encircled", region_to_json(g.esrg.encircled)},
          {"inverted", region_to_json(g.inverted)}};
}

// ---------------------------------------------------------------------------
// Trajectories

/// Uniformly decimated samples (jump samples always kept) plus the jump log.
inline json trajectory_to_json(const Trajectory& t, std::size_t max_points = kTrajectoryPoints) {
  std::vector<std::size_t> keep;
  const std::size_t n = t.size();
  const std::size_t stride = n <= max_points ? 1 : (n + max_points - 1) / max_points;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % stride == 0 || i + 1 == n || t.jump_flags[i] == 1) keep.push_back(i);
  }
  json times = json::array(), y = json::array(), e = json::array(), r = json::array(), flags = json::array();
  for (auto i : keep) {
    times.push_back(t.times[i]);
    y.push_back(number(t.outputs[i]));
    e.push_back(number(t.errors[i]));
    r.push_back(number(t.references[i]));
    flags.push_back(t.jump_flags[i]);
  }
  json jumps = json::array();
  for (const auto& j : t.jumps) {
    jumps.push_back({{"time", j.time}, {"pre", detail::vector_json(j.pre)}, {"post", detail::vector_json(j.post)}});
  }
  return {{"time", times}, {"y", y},         {"e", e},           {"r", r},
          {"jump_flag", flags}, {"jumps", jumps}, {"samples", n}, {"decimation", stride}};
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& t) {
  const Eigen::Index n = t.states.empty() ? 0 : t.states.front().size();
  out << "time,y,e";
  for (Eigen::Index k = 0; k < n; ++k) out << ",x" << (k + 1);
  out << ",jump_flag\n";
  out.precision(17);
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t.times[i] << ',' << t.outputs[i] << ',' << t.errors[i];
    for (Eigen::Index k = 0; k < n; ++k) out << ',' << t.states[i](k);
    out << ',' << t.jump_flags[i] << '\n';
  }
}

}  // namespace srg::io
