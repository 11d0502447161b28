#pragma once

// Sets in the extended complex plane and the operations the scaled-graph
// calculus needs: affine maps, Moebius inversion, distance, radius and the
// shape predicates used by the separation theorem.
//
// Every region is symmetric about the real axis. Parametric shapes stay exact;
// nothing is rasterised. Boundaries are exposed as parametric pieces which the
// metric queries sample and refine.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace srg {

using Complex = std::complex<double>;

inline constexpr double kGeometryTolerance = 1e-9;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Point of C_inf = C u {inf}.
struct ExtendedPoint {
  Complex value{};
  bool infinite = false;

  static ExtendedPoint at_infinity() { return {Complex{}, true}; }
};

/// r e^{j phi} -> (1/r) e^{j phi}, i.e. z -> 1 / conj(z); 0 and inf swap.
inline ExtendedPoint mobius_invert(const ExtendedPoint& p) {
  if (p.infinite) return {};
  if (p.value == Complex{}) return ExtendedPoint::at_infinity();
  return {1.0 / std::conj(p.value), false};
}

/// Finite-point inversion; 0 maps to NaN (callers treat it as inf).
inline Complex invert_point(Complex z) {
  if (z == Complex{}) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  return 1.0 / std::conj(z);
}

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// ---------------------------------------------------------------------------
// Polylines

namespace detail {

inline double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

inline double segment_distance(Complex p, Complex a, Complex b) {
  const Complex ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  const double t = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

}  // namespace detail

/// Closed polyline (the last vertex connects back to the first) with a cached
/// bounding box for fast winding queries.
struct ClosedPolyline {
  std::vector<Complex> points;
  double min_re = kInfinity, max_re = -kInfinity, min_im = kInfinity, max_im = -kInfinity;

  ClosedPolyline() = default;
  explicit ClosedPolyline(std::vector<Complex> pts) : points(std::move(pts)) {
    for (const auto& p : points) {
      min_re = std::min(min_re, p.real());
      max_re = std::max(max_re, p.real());
      min_im = std::min(min_im, p.imag());
      max_im = std::max(max_im, p.imag());
    }
  }

  bool outside_box(Complex z) const {
    return z.real() < min_re || z.real() > max_re || z.imag() < min_im || z.imag() > max_im;
  }

  /// Clockwise winding number by signed edge crossings (exact for the polyline).
  int clockwise_winding(Complex z) const {
    if (points.size() < 2 || outside_box(z)) return 0;
    int ccw = 0;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Complex a = points[i];
      const Complex b = points[(i + 1) % n];
      const double side = detail::cross(b - a, z - a);
      if (a.imag() <= z.imag()) {
        if (b.imag() > z.imag() && side > 0) ++ccw;
      } else if (b.imag() <= z.imag() && side < 0) {
        --ccw;
      }
    }
    return -ccw;
  }

  /// Clockwise winding in one pass, or nullopt when z lies within tol of an edge.
  std::optional<int> winding_unless_near(Complex z, double tol) const {
    if (points.size() < 2) return 0;
    if (z.real() < min_re - tol || z.real() > max_re + tol || z.imag() < min_im - tol || z.imag() > max_im + tol) {
      return 0;
    }
    int ccw = 0;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Complex a = points[i];
      const Complex b = points[(i + 1) % n];
      if (z.real() >= std::min(a.real(), b.real()) - tol && z.real() <= std::max(a.real(), b.real()) + tol &&
          z.imag() >= std::min(a.imag(), b.imag()) - tol && z.imag() <= std::max(a.imag(), b.imag()) + tol &&
          detail::segment_distance(z, a, b) <= tol) {
        return std::nullopt;
      }
      const double side = detail::cross(b - a, z - a);
      if (a.imag() <= z.imag()) {
        if (b.imag() > z.imag() && side > 0) ++ccw;
      } else if (b.imag() <= z.imag() && side < 0) {
        --ccw;
      }
    }
    return -ccw;
  }

  double distance(Complex z) const {
    double best = kInfinity;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
      best = std::min(best, detail::segment_distance(z, points[i], points[(i + 1) % n]));
    }
    return best;
  }
};

// ---------------------------------------------------------------------------
// Lifted coordinates. (x, rho) = (Re z, |z|^2) turns every circle centred on
// the real axis into a straight line, so h-convexity becomes ordinary
// convexity.

struct Lifted {
  double x = 0.0;
  double rho = 0.0;
};

inline Lifted lift(Complex z) { return {z.real(), std::norm(z)}; }

/// Upper-half preimage of a lifted point.
inline Complex unlift_upper(Lifted p) {
  return {p.x, std::sqrt(std::max(p.rho - p.x * p.x, 0.0))};
}

namespace detail {

inline double lifted_cross(Lifted o, Lifted a, Lifted b) {
  return (a.x - o.x) * (b.rho - o.rho) - (a.rho - o.rho) * (b.x - o.x);
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
inline std::vector<Lifted> convex_hull(std::vector<Lifted> pts) {
  std::sort(pts.begin(), pts.end(), [](const Lifted& a, const Lifted& b) {
    return a.x < b.x || (a.x == b.x && a.rho < b.rho);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Lifted& a, const Lifted& b) { return a.x == b.x && a.rho == b.rho; }),
            pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Lifted> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && lifted_cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && lifted_cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double lifted_segment_distance(Lifted p, Lifted a, Lifted b) {
  return segment_distance({p.x, p.rho}, {a.x, a.rho}, {b.x, b.rho});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Region

class Region;

namespace shapes {

struct Empty {};

/// Closed disc centred on the real axis. Radius 0 is a single point.
struct Disc {
  double center = 0.0;
  double radius = 0.0;
};

/// {r e^{j phi} : phi in [-pi/2, pi/2], r in [-r_left, r_right]}: a right
/// half-disc of radius r_right glued to a left half-disc of radius r_left.
struct HalfDiscUnion {
  double r_right = 0.0;
  double r_left = 0.0;
};

/// {offset + factor * z : z in base}.
struct TranslatedScaled;
/// {1 / conj(z) : z in base}.
struct Inverted;

/// h-convex hull, stored as a convex polygon in lifted coordinates.
struct HConvexHull {
  std::vector<Lifted> vertices;  // counter-clockwise
};

/// Points encircled clockwise by a closed curve often enough that
/// winding + n_poles > 0.
struct Encircled {
  std::shared_ptr<const ClosedPolyline> contour;
  int n_poles = 0;
};

/// Even-odd polygon set. With `unbounded` the region is the complement
/// (boundary kept). With `conjugate_closed` the mirror image is included.
struct Sampled {
  std::vector<std::vector<Complex>> rings;
  bool unbounded = false;
  bool conjugate_closed = true;
};

struct Union;

}  // namespace shapes

class Region {
 public:
  struct Node;

  Region();

  template <class Shape>
  static Region make(Shape shape);

  template <class Shape>
  const Shape* as() const;

  const Node& node() const { return *node_; }
  std::string_view kind_name() const;
  bool is_empty() const;

 private:
  explicit Region(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

namespace shapes {

struct TranslatedScaled {
  Region base;
  double offset = 0.0;
  double factor = 1.0;
};

struct Inverted {
  Region base;
};

struct Union {
  std::vector<Region> parts;
};

}  // namespace shapes

struct Region::Node {
  std::variant<shapes::Empty, shapes::Disc, shapes::HalfDiscUnion, shapes::TranslatedScaled,
               shapes::Inverted, shapes::HConvexHull, shapes::Encircled, shapes::Sampled,
               shapes::Union>
      shape;
};

inline Region::Region() : node_(std::make_shared<const Node>(Node{shapes::Empty{}})) {}

template <class Shape>
Region Region::make(Shape shape) {
  return Region(std::make_shared<const Node>(Node{std::move(shape)}));
}

template <class Shape>
const Shape* Region::as() const {
  return std::get_if<Shape>(&node_->shape);
}

inline bool Region::is_empty() const {
  if (as<shapes::Empty>()) return true;
  if (const auto* u = as<shapes::Union>()) {
    return std::all_of(u->parts.begin(), u->parts.end(), [](const Region& r) { return r.is_empty(); });
  }
  return false;
}

inline std::string_view Region::kind_name() const {
  struct Namer {
    std::string_view operator()(const shapes::Empty&) const { return "empty"; }
    std::string_view operator()(const shapes::Disc&) const { return "disc"; }
    std::string_view operator()(const shapes::HalfDiscUnion&) const { return "half_disc_union"; }
    std::string_view operator()(const shapes::TranslatedScaled&) const { return "translated_scaled"; }
    std::string_view operator()(const shapes::Inverted&) const { return "inverted"; }
    std::string_view operator()(const shapes::HConvexHull&) const { return "h_convex_hull"; }
    std::string_view operator()(const shapes::Encircled&) const { return "encircled"; }
    std::string_view operator()(const shapes::Sampled&) const { return "sampled"; }
    std::string_view operator()(const shapes::Union&) const { return "union"; }
  };
  return std::visit(Namer{}, node_->shape);
}

// ---------------------------------------------------------------------------
// Constructors

inline Region make_empty() { return Region{}; }

inline Region make_disc(double center, double radius) {
  if (!(radius >= 0.0) || !std::isfinite(center) || !std::isfinite(radius)) {
    throw std::invalid_argument("disc: radius must be finite and >= 0");
  }
  return Region::make(shapes::Disc{center, radius});
}

inline Region make_point(double x) { return make_disc(x, 0.0); }

/// D_[a,b]: the real-centred disc meeting the real axis in [a, b].
inline Region make_disc_interval(double a, double b) {
  if (a > b) std::swap(a, b);
  return make_disc(0.5 * (a + b), 0.5 * (b - a));
}

inline Region make_half_disc_union(double r_right, double r_left) {
  if (!(r_right >= 0.0) || !(r_left >= 0.0)) {
    throw std::invalid_argument("half_disc_union: radii must be >= 0");
  }
  return Region::make(shapes::HalfDiscUnion{r_right, r_left});
}

inline Region make_sampled(std::vector<std::vector<Complex>> rings, bool unbounded = false,
                           bool conjugate_closed = true) {
  for (auto& ring : rings) {
    if (ring.size() >= 2 && ring.front() != ring.back()) ring.push_back(ring.front());
  }
  return Region::make(shapes::Sampled{std::move(rings), unbounded, conjugate_closed});
}

inline Region make_union(std::vector<Region> parts) {
  std::erase_if(parts, [](const Region& r) { return r.is_empty(); });
  if (parts.empty()) return make_empty();
  if (parts.size() == 1) return parts.front();
  return Region::make(shapes::Union{std::move(parts)});
}

inline Region make_encircled(std::shared_ptr<const ClosedPolyline> contour, int n_poles) {
  return Region::make(shapes::Encircled{std::move(contour), n_poles});
}

// ---------------------------------------------------------------------------
// Membership

namespace detail {

inline bool half_disc_contains(Complex z, double radius, double side, double tol) {
  return side * z.real() >= -tol && std::abs(z) <= radius + tol;
}

inline bool hull_contains(const std::vector<Lifted>& v, Lifted p) {
  const double tol = kGeometryTolerance * (1.0 + std::abs(p.x) + std::abs(p.rho));
  if (v.empty()) return false;
  if (v.size() == 1) return std::hypot(p.x - v[0].x, p.rho - v[0].rho) <= tol;
  if (v.size() == 2) return lifted_segment_distance(p, v[0], v[1]) <= tol;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Lifted a = v[i];
    const Lifted b = v[(i + 1) % v.size()];
    const double len = std::hypot(b.x - a.x, b.rho - a.rho);
    if (lifted_cross(a, b, p) < -tol * len) return false;
  }
  return true;
}

inline bool rings_contain(const std::vector<std::vector<Complex>>& rings, Complex z) {
  bool inside = false;
  for (const auto& ring : rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i + 1 < n || (n > 0 && i < n && ring.front() != ring.back()); ++i) {
      const Complex a = ring[i];
      const Complex b = ring[(i + 1) % n];
      if (segment_distance(z, a, b) <= kGeometryTolerance) return true;
      if ((a.imag() > z.imag()) != (b.imag() > z.imag())) {
        const double x = a.real() + (z.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
        if (z.real() < x) inside = !inside;
      }
      if (i + 1 >= n) break;
    }
  }
  return inside;
}

inline bool ring_set_contains(const std::vector<std::vector<Complex>>& rings, bool unbounded, Complex z) {
  bool on_boundary = false;
  for (const auto& ring : rings) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      if (segment_distance(z, ring[i], ring[i + 1]) <= kGeometryTolerance) on_boundary = true;
    }
  }
  if (on_boundary) return true;
  return rings_contain(rings, z) != unbounded;
}

}  // namespace detail

bool contains(const Region& region, Complex z);

/// True when inf belongs to the (closure of the) region.
bool contains_infinity(const Region& region);

inline bool contains(const Region& region, Complex z) {
  const double tol = kGeometryTolerance;
  struct Visitor {
    Complex z;
    double tol;
    bool operator()(const shapes::Empty&) const { return false; }
    bool operator()(const shapes::Disc& d) const { return std::abs(z - d.center) <= d.radius + tol; }
    bool operator()(const shapes::HalfDiscUnion& h) const {
      return detail::half_disc_contains(z, h.r_right, 1.0, tol) ||
             detail::half_disc_contains(z, h.r_left, -1.0, tol);
    }
    bool operator()(const shapes::TranslatedScaled& t) const {
      return contains(t.base, (z - t.offset) / t.factor);
    }
    bool operator()(const shapes::Inverted& inv) const {
      if (z == Complex{}) return contains_infinity(inv.base);
      return contains(inv.base, invert_point(z));
    }
    bool operator()(const shapes::HConvexHull& h) const { return detail::hull_contains(h.vertices, lift(z)); }
    bool operator()(const shapes::Encircled& e) const {
      const auto w = e.contour->winding_unless_near(z, tol);
      return !w || *w + e.n_poles > 0;
    }
    bool operator()(const shapes::Sampled& s) const {
      if (detail::ring_set_contains(s.rings, s.unbounded, z)) return true;
      return s.conjugate_closed && detail::ring_set_contains(s.rings, s.unbounded, std::conj(z));
    }
    bool operator()(const shapes::Union& u) const {
      return std::any_of(u.parts.begin(), u.parts.end(), [&](const Region& r) { return contains(r, z); });
    }
  };
  return std::visit(Visitor{z, tol}, region.node().shape);
}

inline bool contains_infinity(const Region& region) {
  struct Visitor {
    bool operator()(const shapes::Empty&) const { return false; }
    bool operator()(const shapes::Disc&) const { return false; }
    bool operator()(const shapes::HalfDiscUnion&) const { return false; }
    bool operator()(const shapes::TranslatedScaled& t) const { return contains_infinity(t.base); }
    bool operator()(const shapes::Inverted& inv) const { return contains(inv.base, Complex{}); }
    bool operator()(const shapes::HConvexHull&) const { return false; }
    bool operator()(const shapes::Encircled& e) const { return e.n_poles > 0; }
    bool operator()(const shapes::Sampled& s) const { return s.unbounded; }
    bool operator()(const shapes::Union& u) const {
      return std::any_of(u.parts.begin(), u.parts.end(), [](const Region& r) { return contains_infinity(r); });
    }
  };
  return std::visit(Visitor{}, region.node().shape);
}

inline bool is_bounded(const Region& region) { return !contains_infinity(region); }

// ---------------------------------------------------------------------------
// Exact point distance (parametric kinds only)

namespace detail {

inline double half_disc_distance(Complex z, double radius, double side) {
  const double x = side * z.real();
  const double y = z.imag();
  if (x >= 0.0) return std::max(std::abs(z) - radius, 0.0);
  return std::hypot(x, y - std::clamp(y, -radius, radius));
}

}  // namespace detail

/// Distance from z to the region when it has a closed form; nullopt otherwise.
inline std::optional<double> point_distance(const Region& region, Complex z) {
  struct Visitor {
    Complex z;
    std::optional<double> operator()(const shapes::Empty&) const { return kInfinity; }
    std::optional<double> operator()(const shapes::Disc& d) const {
      return std::max(std::abs(z - d.center) - d.radius, 0.0);
    }
    std::optional<double> operator()(const shapes::HalfDiscUnion& h) const {
      return std::min(detail::half_disc_distance(z, h.r_right, 1.0),
                      detail::half_disc_distance(z, h.r_left, -1.0));
    }
    std::optional<double> operator()(const shapes::TranslatedScaled& t) const {
      auto d = point_distance(t.base, (z - t.offset) / t.factor);
      if (!d) return std::nullopt;
      return std::abs(t.factor) * *d;
    }
    std::optional<double> operator()(const shapes::Union& u) const {
      double best = kInfinity;
      for (const auto& part : u.parts) {
        auto d = point_distance(part, z);
        if (!d) return std::nullopt;
        best = std::min(best, *d);
      }
      return best;
    }
    std::optional<double> operator()(const shapes::Inverted&) const {
      return std::nullopt;
    }
    std::optional<double> operator()(const shapes::HConvexHull&) const {
      return std::nullopt;
    }
    std::optional<double> operator()(const shapes::Encircled&) const {
      return std::nullopt;
    }
    std::optional<double> operator()(const shapes::Sampled&) const {
      return std::nullopt;
    }
  };
  return std::visit(Visitor{z}, region.node().shape);
}

inline bool has_exact_distance(const Region& region) { return point_distance(region, Complex{}).has_value(); }

// ---------------------------------------------------------------------------
// Boundary pieces

/// Parametric curve t in [0, 1] covering part of a region's boundary. Every
/// point lies in the closure of the region; together the pieces cover the
/// boundary.
struct BoundaryPiece {
  std::function<Complex(double)> at;
  int initial_samples = 2;
};

struct BoundarySample {
  Complex z;
  std::size_t piece;
  double t;
};

namespace detail {

inline BoundaryPiece point_piece(Complex p) {
  return {[p](double) { return p; }, 1};
}

inline BoundaryPiece polyline_piece(std::shared_ptr<const std::vector<Complex>> pts, bool close) {
  const std::size_t n = pts->size();
  const std::size_t segments = close ? n : n - 1;
  auto at = [pts, n, segments](double t) {
    const double u = std::clamp(t, 0.0, 1.0) * static_cast<double>(segments);
    std::size_t i = std::min(static_cast<std::size_t>(u), segments - 1);
    const double f = u - static_cast<double>(i);
    return (*pts)[i % n] * (1.0 - f) + (*pts)[(i + 1) % n] * f;
  };
  return {std::move(at), static_cast<int>(segments + 1)};
}

}  // namespace detail

std::vector<BoundaryPiece> boundary_pieces(const Region& region);

inline std::vector<BoundaryPiece> boundary_pieces(const Region& region) {
  using detail::point_piece;
  struct Visitor {
    std::vector<BoundaryPiece> operator()(const shapes::Empty&) const { return {}; }
    std::vector<BoundaryPiece> operator()(const shapes::Disc& d) const {
      if (d.radius == 0.0) return {point_piece(d.center)};
      const double c = d.center;
      const double r = d.radius;
      return {{[c, r](double t) { return c + std::polar(r, 2.0 * std::numbers::pi * t); }, 257}};
    }
    std::vector<BoundaryPiece> operator()(const shapes::HalfDiscUnion& h) const {
      std::vector<BoundaryPiece> out;
      const double pi = std::numbers::pi;
      if (h.r_right > 0) {
        const double r = h.r_right;
        out.push_back({[r, pi](double t) { return std::polar(r, -pi / 2 + pi * t); }, 181});
      }
      if (h.r_left > 0) {
        const double r = h.r_left;
        out.push_back({[r, pi](double t) { return -std::polar(r, -pi / 2 + pi * t); }, 181});
      }
      const double m = std::max(h.r_right, h.r_left);
      if (m > 0) {
        out.push_back({[m](double t) { return Complex{0.0, -m + 2.0 * m * t}; }, 65});
      } else {
        out.push_back(point_piece(0.0));
      }
      return out;
    }
    std::vector<BoundaryPiece> operator()(const shapes::TranslatedScaled& ts) const {
      auto out = boundary_pieces(ts.base);
      for (auto& p : out) {
        p.at = [f = std::move(p.at), o = ts.offset, k = ts.factor](double t) { return o + k * f(t); };
      }
      return out;
    }
    std::vector<BoundaryPiece> operator()(const shapes::Inverted& inv) const {
      auto out = boundary_pieces(inv.base);
      for (auto& p : out) {
        p.at = [f = std::move(p.at)](double t) { return invert_point(f(t)); };
      }
      return out;
    }
    std::vector<BoundaryPiece> operator()(const shapes::HConvexHull& h) const {
      std::vector<BoundaryPiece> out;
      const auto& v = h.vertices;
      if (v.size() == 1) {
        const Complex z = unlift_upper(v[0]);
        out.push_back(point_piece(z));
        if (z.imag() != 0.0) out.push_back(point_piece(std::conj(z)));
        return out;
      }
      const std::size_t edges = v.size() == 2 ? 1 : v.size();
      for (std::size_t i = 0; i < edges; ++i) {
        const Lifted a = v[i];
        const Lifted b = v[(i + 1) % v.size()];
        auto upper = [a, b](double t) {
          return unlift_upper({a.x + t * (b.x - a.x), a.rho + t * (b.rho - a.rho)});
        };
        out.push_back({upper, 9});
        out.push_back({[upper](double t) { return std::conj(upper(t)); }, 9});
      }
      return out;
    }
    std::vector<BoundaryPiece> operator()(const shapes::Encircled& e) const {
      if (e.contour->points.empty()) return {};
      auto pts = std::shared_ptr<const std::vector<Complex>>(e.contour, &e.contour->points);
      return {detail::polyline_piece(pts, true)};
    }
    std::vector<BoundaryPiece> operator()(const shapes::Sampled& s) const {
      std::vector<BoundaryPiece> out;
      for (const auto& ring : s.rings) {
        if (ring.empty()) continue;
        if (ring.size() == 1) {
          out.push_back(point_piece(ring[0]));
          continue;
        }
        out.push_back(detail::polyline_piece(std::make_shared<const std::vector<Complex>>(ring), false));
        if (s.conjugate_closed) {
          std::vector<Complex> mirror(ring.size());
          std::transform(ring.begin(), ring.end(), mirror.begin(), [](Complex z) { return std::conj(z); });
          out.push_back(detail::polyline_piece(std::make_shared<const std::vector<Complex>>(mirror), false));
        }
      }
      return out;
    }
    std::vector<BoundaryPiece> operator()(const shapes::Union& u) const {
      std::vector<BoundaryPiece> out;
      for (const auto& part : u.parts) {
        auto sub = boundary_pieces(part);
        std::move(sub.begin(), sub.end(), std::back_inserter(out));
      }
      return out;
    }
  };
  return std::visit(Visitor{}, region.node().shape);
}

/// Uniform-in-parameter samples of every piece (non-finite points dropped).
inline std::vector<BoundarySample> sample_pieces(const std::vector<BoundaryPiece>& pieces, int min_per_piece = 0) {
  std::vector<BoundarySample> out;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const int n = std::max(pieces[k].initial_samples, pieces[k].initial_samples > 1 ? min_per_piece : 1);
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      const Complex z = pieces[k].at(t);
      if (is_finite(z)) out.push_back({z, k, t});
    }
  }
  return out;
}

inline std::vector<Complex> sample_boundary(const Region& region, int min_per_piece = 0) {
  std::vector<Complex> out;
  for (const auto& s : sample_pieces(boundary_pieces(region), min_per_piece)) out.push_back(s.z);
  return out;
}

namespace detail {

inline std::vector<Complex> thin(std::vector<Complex> pts, std::size_t max_count) {
  if (pts.size() <= max_count) return pts;
  std::vector<Complex> out;
  out.reserve(max_count);
  const double step = static_cast<double>(pts.size()) / static_cast<double>(max_count);
  for (std::size_t i = 0; i < max_count; ++i) out.push_back(pts[static_cast<std::size_t>(i * step)]);
  return out;
}

template <class F>
double golden_minimize(F&& f, double lo, double hi, int iterations = 60) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  double best = std::min({f(lo), f(hi), fc, fd});
  for (int i = 0; i < iterations && b - a > 1e-15; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
    best = std::min({best, fc, fd});
  }
  return best;
}

/// Minimise `cost` over the pieces: sample, then refine the best local minima.
template <class Cost>
double minimize_over_boundary(const std::vector<BoundaryPiece>& pieces, Cost&& cost, std::size_t refine = 32) {
  const auto samples = sample_pieces(pieces);
  if (samples.empty()) return kInfinity;
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) values[i] = cost(samples[i].z);

  struct Candidate {
    double value;
    std::size_t piece;
    double lo, hi;
  };
  std::vector<Candidate> candidates;
  double best = kInfinity;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    best = std::min(best, values[i]);
    const bool same_prev = i > 0 && samples[i - 1].piece == samples[i].piece;
    const bool same_next = i + 1 < samples.size() && samples[i + 1].piece == samples[i].piece;
    if (!same_prev && !same_next) continue;
    if ((same_prev && values[i - 1] < values[i]) || (same_next && values[i + 1] < values[i])) continue;
    candidates.push_back({values[i], samples[i].piece, same_prev ? samples[i - 1].t : samples[i].t,
                          same_next ? samples[i + 1].t : samples[i].t});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  if (candidates.size() > refine) candidates.resize(refine);
  for (const auto& c : candidates) {
    const auto& at = pieces[c.piece].at;
    auto f = [&](double t) {
      const Complex z = at(t);
      return is_finite(z) ? cost(z) : kInfinity;
    };
    best = std::min(best, golden_minimize(f, c.lo, c.hi));
  }
  return best;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scaled-graph calculus

Region scale_region(const Region& s, double alpha);
Region translate_region(const Region& s, double c);
Region mobius_invert(const Region& s);

/// {alpha z : z in s}; alpha must be nonzero.
inline Region scale_region(const Region& s, double alpha) {
  if (alpha == 0.0 || !std::isfinite(alpha)) throw std::invalid_argument("scale_region: alpha must be nonzero");
  struct Visitor {
    const Region& self;
    double a;
    Region operator()(const shapes::Empty&) const { return self; }
    Region operator()(const shapes::Disc& d) const { return make_disc(a * d.center, std::abs(a) * d.radius); }
    Region operator()(const shapes::HalfDiscUnion& h) const {
      return a > 0 ? make_half_disc_union(a * h.r_right, a * h.r_left)
                   : make_half_disc_union(-a * h.r_left, -a * h.r_right);
    }
    Region operator()(const shapes::TranslatedScaled& t) const {
      return Region::make(shapes::TranslatedScaled{t.base, a * t.offset, a * t.factor});
    }
    Region operator()(const shapes::Inverted& inv) const {
      return Region::make(shapes::Inverted{scale_region(inv.base, 1.0 / a)});
    }
    Region operator()(const shapes::Sampled& s) const {
      auto rings = s.rings;
      for (auto& ring : rings) {
        for (auto& z : ring) z *= a;
      }
      return Region::make(shapes::Sampled{std::move(rings), s.unbounded, s.conjugate_closed});
    }
    Region operator()(const shapes::Union& u) const {
      std::vector<Region> parts;
      for (const auto& p : u.parts) parts.push_back(scale_region(p, a));
      return make_union(std::move(parts));
    }
    Region operator()(const shapes::HConvexHull&) const {
      return Region::make(shapes::TranslatedScaled{self, 0.0, a});
    }
    Region operator()(const shapes::Encircled&) const {
      return Region::make(shapes::TranslatedScaled{self, 0.0, a});
    }
  };
  return std::visit(Visitor{s, alpha}, s.node().shape);
}

/// {z + c : z in s}.
inline Region translate_region(const Region& s, double c) {
  if (c == 0.0) return s;
  struct Visitor {
    const Region& self;
    double c;
    Region operator()(const shapes::Empty&) const { return self; }
    Region operator()(const shapes::Disc& d) const { return make_disc(d.center + c, d.radius); }
    Region operator()(const shapes::TranslatedScaled& t) const {
      return Region::make(shapes::TranslatedScaled{t.base, t.offset + c, t.factor});
    }
    Region operator()(const shapes::Sampled& s) const {
      auto rings = s.rings;
      for (auto& ring : rings) {
        for (auto& z : ring) z += c;
      }
      return Region::make(shapes::Sampled{std::move(rings), s.unbounded, s.conjugate_closed});
    }
    Region operator()(const shapes::Union& u) const {
      std::vector<Region> parts;
      for (const auto& p : u.parts) parts.push_back(translate_region(p, c));
      return make_union(std::move(parts));
    }
    Region operator()(const shapes::HalfDiscUnion&) const {
      return Region::make(shapes::TranslatedScaled{self, c, 1.0});
    }
    Region operator()(const shapes::Inverted&) const {
      return Region::make(shapes::TranslatedScaled{self, c, 1.0});
    }
    Region operator()(const shapes::HConvexHull&) const {
      return Region::make(shapes::TranslatedScaled{self, c, 1.0});
    }
    Region operator()(const shapes::Encircled&) const {
      return Region::make(shapes::TranslatedScaled{self, c, 1.0});
    }
  };
  return std::visit(Visitor{s, c}, s.node().shape);
}

namespace detail {

/// Ring vertices under inversion, with extra vertices on edges that pass close
/// to the origin relative to their length (their images are long arcs).
inline std::vector<Complex> invert_ring(const std::vector<Complex>& ring) {
  std::vector<Complex> out;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Complex a = ring[i];
    if (a != Complex{}) out.push_back(invert_point(a));
    if (i + 1 == ring.size()) break;
    const Complex b = ring[i + 1];
    const double len = std::abs(b - a);
    const double closest = segment_distance(Complex{}, a, b);
    if (len > 0 && closest < 0.5 * len) {
      const int extra = 32;
      for (int k = 1; k < extra; ++k) {
        const Complex p = a + (b - a) * (static_cast<double>(k) / extra);
        if (std::abs(p) > 1e-12) out.push_back(invert_point(p));
      }
    }
  }
  return out;
}

}  // namespace detail

/// Pointwise image under z -> 1/conj(z) (0 <-> inf).
inline Region mobius_invert(const Region& s) {
  struct Visitor {
    const Region& self;
    Region operator()(const shapes::Empty&) const { return self; }
    Region operator()(const shapes::Disc& d) const {
      const double a = d.center - d.radius;
      const double b = d.center + d.radius;
      if (d.radius == 0.0 && d.center != 0.0) return make_point(1.0 / d.center);
      if (a > 0.0 || b < 0.0) return make_disc_interval(1.0 / b, 1.0 / a);
      return Region::make(shapes::Inverted{self});
    }
    Region operator()(const shapes::Inverted& inv) const { return inv.base; }
    Region operator()(const shapes::Sampled& s) const {
      std::vector<std::vector<Complex>> rings;
      int enclosing = 0;
      for (const auto& ring : s.rings) {
        if (detail::rings_contain({ring}, Complex{})) ++enclosing;
        rings.push_back(detail::invert_ring(ring));
      }
      const bool unbounded = s.unbounded != (enclosing % 2 == 1);
      return Region::make(shapes::Sampled{std::move(rings), unbounded, s.conjugate_closed});
    }
    Region operator()(const shapes::Union& u) const {
      std::vector<Region> parts;
      for (const auto& p : u.parts) parts.push_back(mobius_invert(p));
      return make_union(std::move(parts));
    }
    Region operator()(const shapes::HalfDiscUnion&) const {
      return Region::make(shapes::Inverted{self});
    }
    Region operator()(const shapes::TranslatedScaled&) const {
      return Region::make(shapes::Inverted{self});
    }
    Region operator()(const shapes::HConvexHull&) const {
      return Region::make(shapes::Inverted{self});
    }
    Region operator()(const shapes::Encircled&) const {
      return Region::make(shapes::Inverted{self});
    }
  };
  return std::visit(Visitor{s}, s.node().shape);
}

// ---------------------------------------------------------------------------
// Metric queries

namespace detail {

inline constexpr double kContactTolerance = 1e-12;

inline double distance_to_exact(const Region& target, const Region& other) {
  for (const Complex z : sample_boundary(target)) {
    if (contains(other, z)) return 0.0;
  }
  auto cost = [&](Complex z) { return *point_distance(target, z); };
  const double d = minimize_over_boundary(boundary_pieces(other), cost);
  return d <= kContactTolerance ? 0.0 : d;
}

inline double sampled_distance(const Region& a, const Region& b) {
  const auto pa = thin(sample_boundary(a), 4096);
  const auto pb = thin(sample_boundary(b), 4096);
  for (const Complex z : pa) {
    if (contains(b, z)) return 0.0;
  }
  for (const Complex z : pb) {
    if (contains(a, z)) return 0.0;
  }
  double best = kInfinity;
  for (const Complex x : pa) {
    for (const Complex y : pb) best = std::min(best, std::abs(x - y));
  }
  return best;
}

}  // namespace detail

/// inf |z1 - z2| over z1 in a, z2 in b, with |inf - inf| = 0.
inline double region_distance(const Region& a, const Region& b) {
  if (a.is_empty() || b.is_empty()) return kInfinity;
  if (contains_infinity(a) && contains_infinity(b)) return 0.0;
  if (const auto* da = a.as<shapes::Disc>()) {
    if (auto d = point_distance(b, da->center)) return std::max(*d - da->radius, 0.0);
  }
  if (const auto* db = b.as<shapes::Disc>()) {
    if (auto d = point_distance(a, db->center)) return std::max(*d - db->radius, 0.0);
  }
  if (has_exact_distance(b)) return detail::distance_to_exact(b, a);
  if (has_exact_distance(a)) return detail::distance_to_exact(a, b);
  return detail::sampled_distance(a, b);
}

namespace detail {

/// Farthest distance from q to a half-disc union.
inline double half_disc_union_farthest(const shapes::HalfDiscUnion& h, Complex q) {
  const double pi = std::numbers::pi;
  double best = 0.0;
  auto arc = [&](double r, double side) {
    if (r <= 0.0) return;
    auto point = [&](double th) { return side * std::polar(r, th); };
    best = std::max({best, std::abs(point(-pi / 2) - q), std::abs(point(pi / 2) - q)});
    const Complex local = q / side;  // farthest arc point is opposite q
    const double th = std::atan2(-local.imag(), -local.real());
    if (th >= -pi / 2 && th <= pi / 2) best = std::max(best, std::abs(point(th) - q));
  };
  arc(h.r_right, 1.0);
  arc(h.r_left, -1.0);
  best = std::max(best, std::abs(q));
  return best;
}

inline std::optional<double> farthest_from(const Region& region, Complex q) {
  if (const auto* d = region.as<shapes::Disc>()) return std::abs(d->center - q) + d->radius;
  if (const auto* h = region.as<shapes::HalfDiscUnion>()) return half_disc_union_farthest(*h, q);
  if (const auto* t = region.as<shapes::TranslatedScaled>()) {
    auto f = farthest_from(t->base, (q - t->offset) / t->factor);
    if (f) return std::abs(t->factor) * *f;
  }
  return std::nullopt;
}

}  // namespace detail

/// Smallest radius of an origin-centred disc containing s (inf if unbounded).
inline double region_radius(const Region& s) {
  if (s.is_empty()) return 0.0;
  if (contains_infinity(s)) return kInfinity;
  if (auto f = detail::farthest_from(s, Complex{})) return *f;
  if (const auto* h = s.as<shapes::HConvexHull>()) {
    double m = 0.0;
    for (const auto& v : h->vertices) m = std::max(m, v.rho);
    return std::sqrt(m);
  }
  if (const auto* u = s.as<shapes::Union>()) {
    double m = 0.0;
    for (const auto& p : u->parts) m = std::max(m, region_radius(p));
    return m;
  }
  if (const auto* sm = s.as<shapes::Sampled>()) {
    double m = 0.0;
    for (const auto& ring : sm->rings) {
      for (const auto& z : ring) m = std::max(m, std::abs(z));
    }
    return m;
  }
  return -detail::minimize_over_boundary(boundary_pieces(s), [](Complex z) { return -std::abs(z); });
}

// ---------------------------------------------------------------------------
// Shape predicates

inline constexpr int kStarBoundarySamples = 512;

namespace detail {

inline bool sampled_star_check(const Region& s, Complex kappa) {
  const auto boundary = thin(sample_boundary(s), kStarBoundarySamples);
  for (const Complex z : boundary) {
    for (int k = 1; k <= 10; ++k) {
      const double tau = 0.1 * k;
      if (!contains(s, kappa + tau * (z - kappa))) return false;
    }
  }
  return true;
}

inline bool sampled_chord_check(const Region& s) {
  const auto boundary = thin(sample_boundary(s), kStarBoundarySamples);
  for (const Complex z : boundary) {
    for (int k = 0; k <= 20; ++k) {
      const double u = -1.0 + 0.1 * k;
      if (!contains(s, Complex{z.real(), u * z.imag()})) return false;
    }
  }
  return true;
}

}  // namespace detail

/// tau1 (s - kappa) subset of tau2 (s - kappa) for 0 <= tau1 <= tau2 <= 1.
inline bool is_star_shaped_about(const Region& s, Complex kappa) {
  if (!is_finite(kappa)) throw std::invalid_argument("is_star_shaped_about: kappa must be finite");
  if (s.is_empty() || !contains(s, kappa)) return false;
  if (s.as<shapes::Disc>()) return true;
  if (s.as<shapes::HalfDiscUnion>() && std::abs(kappa) <= kGeometryTolerance) return true;
  if (const auto* t = s.as<shapes::TranslatedScaled>()) {
    return is_star_shaped_about(t->base, (kappa - t->offset) / t->factor);
  }
  return detail::sampled_star_check(s, kappa);
}

/// Every point's vertical chord [z, conj(z)] lies in s.
inline bool has_chord_property(const Region& s) {
  if (s.is_empty()) return true;
  if (s.as<shapes::Disc>() || s.as<shapes::HalfDiscUnion>()) return true;
  if (const auto* t = s.as<shapes::TranslatedScaled>()) return has_chord_property(t->base);
  if (contains_infinity(s) && sample_boundary(s).empty()) return true;
  return detail::sampled_chord_check(s);
}

/// h-convex hull of a point set: the smallest conjugate-symmetric set that
/// contains, for any two members, the arc joining them on the circle centred
/// on the real axis (a vertical segment when real parts agree).
inline Region h_convex_hull(const std::vector<Complex>& points) {
  std::vector<Lifted> lifted;
  lifted.reserve(points.size());
  for (const Complex z : points) {
    if (!is_finite(z)) throw std::invalid_argument("h_convex_hull: non-finite point");
    lifted.push_back(lift(z));
  }
  if (lifted.empty()) throw std::invalid_argument("h_convex_hull: no points");
  return Region::make(shapes::HConvexHull{detail::convex_hull(std::move(lifted))});
}

}  // namespace srg
