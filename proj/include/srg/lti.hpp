#pragma once

// Real-rational SISO plants: evaluation, poles, Nyquist D-contour, winding
// numbers, the extended SRG and a controllable canonical realisation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "srg/complex_sets.hpp"
#include "srg/errors.hpp"

namespace srg {

/// Coefficients in descending powers of s.
struct TransferFunction {
  std::vector<double> num;
  std::vector<double> den;

  TransferFunction() : num{0.0}, den{1.0} {}

  TransferFunction(std::vector<double> numerator, std::vector<double> denominator)
      : num(std::move(numerator)), den(std::move(denominator)) {
    if (den.empty()) throw InputError("den: coefficient list is empty");
    if (num.empty()) throw InputError("num: coefficient list is empty");
    for (std::size_t i = 0; i < den.size(); ++i) {
      if (!std::isfinite(den[i])) throw InputError("den[" + std::to_string(i) + "]: coefficient is not finite");
    }
    for (std::size_t i = 0; i < num.size(); ++i) {
      if (!std::isfinite(num[i])) throw InputError("num[" + std::to_string(i) + "]: coefficient is not finite");
    }
    if (den.front() == 0.0) throw InputError("den[0]: leading coefficient must be nonzero");
    while (num.size() > 1 && num.front() == 0.0) num.erase(num.begin());
    if (num.size() > den.size()) throw InputError("num: improper transfer function (deg num > deg den)");
  }

  std::size_t order() const { return den.size() - 1; }
  bool strictly_proper() const { return num.size() < den.size() || num.front() == 0.0; }

  /// Limit of G(s) as |s| -> inf.
  double value_at_infinity() const {
    return num.size() == den.size() ? num.front() / den.front() : 0.0;
  }
};

inline Complex polyval(const std::vector<double>& c, Complex s) {
  Complex acc{};
  for (double a : c) acc = acc * s + a;
  return acc;
}

inline Complex polyval_derivative(const std::vector<double>& c, Complex s) {
  Complex acc{};
  const std::size_t n = c.size();
  for (std::size_t i = 0; i + 1 < n; ++i) acc = acc * s + c[i] * static_cast<double>(n - 1 - i);
  return acc;
}

/// num(s) / den(s).
inline Complex evaluate(const TransferFunction& g, Complex s) {
  const Complex d = polyval(g.den, s);
  if (d == Complex{}) throw EvaluationAtPole("evaluation at pole s = " + std::to_string(s.real()) + "+" +
                                             std::to_string(s.imag()) + "j");
  return polyval(g.num, s) / d;
}

// ---------------------------------------------------------------------------
// Roots

inline constexpr double kRootClusterTolerance = 1e-6;

/// Polynomial roots with multiplicity: companion eigenvalues, one Newton
/// polish (kept only if it lowers the residual), clusters replaced by their
/// mean.
inline std::vector<Complex> polynomial_roots(const std::vector<double>& coeffs) {
  std::vector<double> c = coeffs;
  while (!c.empty() && c.front() == 0.0) c.erase(c.begin());
  if (c.size() < 2) return {};
  const int n = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) companion(0, j) = -c[j + 1] / c[0];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<Complex> roots;
  for (int i = 0; i < n; ++i) {
    Complex r = solver.eigenvalues()[i];
    const Complex d = polyval_derivative(c, r);
    if (d != Complex{}) {
      const Complex polished = r - polyval(c, r) / d;
      if (std::abs(polyval(c, polished)) < std::abs(polyval(c, r))) r = polished;
    }
    roots.push_back(r);
  }

  std::vector<bool> used(roots.size(), false);
  std::vector<Complex> out(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    std::vector<std::size_t> members{i};
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (!used[j] && std::abs(roots[j] - roots[i]) < kRootClusterTolerance) members.push_back(j);
    }
    Complex mean{};
    for (auto k : members) mean += roots[k];
    mean /= static_cast<double>(members.size());
    for (auto k : members) {
      used[k] = true;
      out[k] = members.size() > 1 ? mean : roots[k];
    }
  }
  for (auto& r : out) {
    if (std::abs(r.imag()) <= 1e-12 * std::max(1.0, std::abs(r))) r = {r.real(), 0.0};
  }
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  return out;
}

inline std::vector<Complex> poles(const TransferFunction& g) { return polynomial_roots(g.den); }

inline bool is_rhp(Complex p) { return p.real() > kGeometryTolerance; }
inline bool is_on_imaginary_axis(Complex p) { return std::abs(p.real()) <= 1e-7 * std::max(1.0, std::abs(p)); }

inline int count_rhp_poles(const TransferFunction& g) {
  const auto p = poles(g);
  return static_cast<int>(std::count_if(p.begin(), p.end(), is_rhp));
}

// ---------------------------------------------------------------------------
// Nyquist contour

inline constexpr double kIndentationRadius = 1e-4;
inline constexpr double kOmegaMin = 1e-4;
inline constexpr double kDefaultOmegaMax = 1e4;
inline constexpr int kDefaultSamplesPerSide = 4096;

struct NyquistOptions {
  double omega_max = 0.0;  // 0: grow from 1e4 until the tail settles
  int samples_per_side = kDefaultSamplesPerSide;
  double indentation_radius = kIndentationRadius;
};

/// Image of the clockwise D-contour. `frequencies` holds Im(s) of each
/// s-plane point (+-inf for the closure at infinity).
struct NyquistContour {
  std::vector<Complex> samples;
  std::vector<Complex> s_points;
  std::vector<double> frequencies;
  std::vector<Complex> indentations;
  double omega_max = 0.0;
  std::shared_ptr<const ClosedPolyline> polyline;
};

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < n; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (n - 1));
  return out;
}

/// Upper half of the D-contour path, from the real axis to j*omega_max.
inline std::vector<Complex> upper_path(double omega_max, int n, double eps, const std::vector<double>& axis_poles) {
  const double pi = std::numbers::pi;
  const int arc_samples = 64;
  std::vector<Complex> path;
  const bool pole_at_zero = std::any_of(axis_poles.begin(), axis_poles.end(),
                                        [&](double w) { return std::abs(w) <= eps; });
  if (pole_at_zero) {
    for (int k = 0; k <= arc_samples; ++k) path.push_back(std::polar(eps, 0.5 * pi * k / arc_samples));
  } else {
    path.push_back(0.0);
  }
  std::vector<double> positive;
  for (double w : axis_poles) {
    if (w > eps) positive.push_back(w);
  }
  std::sort(positive.begin(), positive.end());
  std::size_t next_pole = 0;
  for (double w : log_grid(kOmegaMin, omega_max, n)) {
    if (pole_at_zero && w <= eps) continue;
    while (next_pole < positive.size() && w > positive[next_pole] - eps) {
      const double w0 = positive[next_pole++];
      for (int k = 0; k <= 2 * arc_samples; ++k) {
        const double th = -0.5 * pi + pi * k / (2 * arc_samples);
        path.push_back(Complex{0.0, w0} + std::polar(eps, th));
      }
    }
    bool near_pole = false;
    for (double w0 : positive) near_pole = near_pole || std::abs(w - w0) < eps;
    if (!near_pole) path.push_back({0.0, w});
  }
  return path;
}

}  // namespace detail

inline NyquistContour nyquist_contour(const TransferFunction& g, const NyquistOptions& opt = {}) {
  if (opt.samples_per_side < 512) throw InputError("samples: need at least 512 samples per side");
  if (opt.omega_max < 0.0 || !std::isfinite(opt.omega_max)) throw InputError("omega_max: must be positive");
  if (opt.omega_max > 0.0 && opt.omega_max <= kOmegaMin) throw InputError("omega_max: must exceed 1e-4");

  NyquistContour out;
  std::vector<double> axis_poles;
  for (const Complex p : poles(g)) {
    if (is_on_imaginary_axis(p) && p.imag() >= -opt.indentation_radius) {
      axis_poles.push_back(std::abs(p.imag()) <= opt.indentation_radius ? 0.0 : p.imag());
    }
    if (is_on_imaginary_axis(p)) out.indentations.push_back({0.0, p.imag()});
  }

  const double g_inf = g.value_at_infinity();
  double omega_max = opt.omega_max > 0.0 ? opt.omega_max : kDefaultOmegaMax;
  std::vector<Complex> upper;
  std::vector<Complex> values;
  for (;;) {
    upper = detail::upper_path(omega_max, opt.samples_per_side, opt.indentation_radius, axis_poles);
    values.resize(upper.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < upper.size(); ++i) {
      values[i] = evaluate(g, upper[i]);
      peak = std::max(peak, std::abs(values[i]));
    }
    const bool settled = std::abs(values.back() - g_inf) < 1e-6 * peak;
    if (opt.omega_max > 0.0 || settled || omega_max >= 1e12) break;
    omega_max *= 10.0;
  }
  out.omega_max = omega_max;

  const double inf = kInfinity;
  auto push = [&](Complex s, Complex v, double f) {
    out.s_points.push_back(s);
    out.samples.push_back(v);
    out.frequencies.push_back(f);
  };
  push({0.0, -inf}, g_inf, -inf);
  for (std::size_t i = upper.size(); i-- > 1;) push(std::conj(upper[i]), std::conj(values[i]), -upper[i].imag());
  for (std::size_t i = 0; i < upper.size(); ++i) push(upper[i], values[i], upper[i].imag());
  push({0.0, inf}, g_inf, inf);
  out.polyline = std::make_shared<const ClosedPolyline>(out.samples);
  return out;
}

/// Clockwise encirclements of z by the closed sample sequence.
inline int winding_number(const std::vector<Complex>& closed, Complex z) {
  if (closed.size() < 2) return 0;
  double total = 0.0;
  const std::size_t n = closed.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex a = closed[i];
    const Complex b = closed[(i + 1) % n];
    if (detail::segment_distance(z, a, b) <= kGeometryTolerance) {
      throw BoundaryAmbiguity("winding number requested for a point on the contour");
    }
    total += std::arg((b - z) / (a - z));
  }
  const double turns = -total / (2.0 * std::numbers::pi);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 0.1) throw UnderSampledContour("winding angle sum is not near an integer");
  return static_cast<int>(rounded);
}

inline int winding_number(const NyquistContour& contour, Complex z) { return winding_number(contour.samples, z); }

// ---------------------------------------------------------------------------
// Extended SRG

inline constexpr int kProbeGrid = 128;

struct ExtendedSRG {
  NyquistContour contour;
  Region hull;
  Region encircled;
  int n_p = 0;

  Region region() const { return make_union({hull, encircled}); }
};

inline ExtendedSRG extended_srg(const TransferFunction& g, const NyquistOptions& opt = {}) {
  ExtendedSRG out;
  out.contour = nyquist_contour(g, opt);
  out.n_p = count_rhp_poles(g);
  out.hull = h_convex_hull(out.contour.samples);

  bool nonempty = out.n_p > 0;
  const auto& poly = *out.contour.polyline;
  if (!nonempty) {
    const double w = poly.max_re - poly.min_re;
    const double h = poly.max_im - poly.min_im;
    for (int i = 0; i < kProbeGrid && !nonempty; ++i) {
      for (int j = 0; j < kProbeGrid && !nonempty; ++j) {
        const Complex z{poly.min_re + w * (i + 0.5) / kProbeGrid, poly.min_im + h * (j + 0.5) / kProbeGrid};
        nonempty = poly.clockwise_winding(z) + out.n_p > 0;
      }
    }
  }
  out.encircled = nonempty ? make_encircled(out.contour.polyline, out.n_p) : make_empty();
  return out;
}

/// SRG'(G)^{-1}.
inline Region inverted_extended_srg(const ExtendedSRG& e) { return mobius_invert(e.region()); }

inline Region inverted_extended_srg(const TransferFunction& g, const NyquistOptions& opt = {}) {
  return inverted_extended_srg(extended_srg(g, opt));
}

// ---------------------------------------------------------------------------
// State space

struct StateSpace {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  Eigen::Index order() const { return A.rows(); }
};

/// Controllable canonical form.
inline StateSpace to_state_space(const TransferFunction& g) {
  const std::size_t n = g.order();
  const double lead = g.den.front();
  std::vector<double> a(n + 1), b(n + 1, 0.0);
  for (std::size_t i = 0; i <= n; ++i) a[i] = g.den[i] / lead;
  const std::size_t offset = n + 1 - g.num.size();
  for (std::size_t i = 0; i < g.num.size(); ++i) b[offset + i] = g.num[i] / lead;

  StateSpace ss;
  ss.D = b[0];
  ss.A = Eigen::MatrixXd::Zero(n, n);
  ss.B = Eigen::VectorXd::Zero(n);
  ss.C = Eigen::RowVectorXd::Zero(n);
  if (n == 0) return ss;
  for (std::size_t j = 0; j < n; ++j) ss.A(0, j) = -a[j + 1];
  for (std::size_t i = 1; i < n; ++i) ss.A(i, i - 1) = 1.0;
  ss.B(0) = 1.0;
  for (std::size_t j = 0; j < n; ++j) ss.C(j) = b[j + 1] - ss.D * a[j + 1];
  return ss;
}

/// C (sI - A)^{-1} B + D.
inline Complex frequency_response(const StateSpace& ss, Complex s) {
  const Eigen::Index n = ss.order();
  if (n == 0) return ss.D;
  const Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(n, n) - ss.A.cast<Complex>();
  const Eigen::VectorXcd x = m.partialPivLu().solve(ss.B.cast<Complex>());
  return (ss.C.cast<Complex>() * x)(0) + ss.D;
}

/// Transfer function of (A, B, C, D) by the Faddeev-LeVerrier recursion.
inline TransferFunction to_transfer_function(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                             const Eigen::RowVectorXd& C, double D) {
  const Eigen::Index n = A.rows();
  std::vector<double> den(n + 1), num(n + 1, 0.0);
  den[0] = 1.0;
  Eigen::MatrixXd N = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    num[k] = (C * N * B)(0);
    const Eigen::MatrixXd AN = A * N;
    den[k] = -AN.trace() / static_cast<double>(k);
    N = AN + den[k] * Eigen::MatrixXd::Identity(n, n);
  }
  for (Eigen::Index k = 0; k <= n; ++k) num[k] += D * den[k];
  double scale = 0.0;
  for (double c : num) scale = std::max(scale, std::abs(c));
  for (double& c : num) {
    if (std::abs(c) <= 1e-13 * scale) c = 0.0;
  }
  return TransferFunction(num, den);
}

inline TransferFunction to_transfer_function(const StateSpace& ss) {
  return to_transfer_function(ss.A, ss.B, ss.C, ss.D);
}

}  // namespace srg
