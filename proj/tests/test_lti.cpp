#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "srg/lti.hpp"

using namespace srg;
using Catch::Approx;

namespace {

const TransferFunction kGs({14, 8}, {1, 13, 58, 96, 34, 4.2});
const TransferFunction kGu({14, 8}, {1, 13, 58, 96, 34, -4});

/// Routh-Hurwitz test: all roots of the polynomial in the open left half-plane.
bool hurwitz(std::vector<double> p) {
  if (p.front() < 0) {
    for (double& c : p) c = -c;
  }
  const std::size_t n = p.size() - 1;
  std::vector<std::vector<double>> rows(n + 1, std::vector<double>((n + 2) / 2 + 1, 0.0));
  for (std::size_t i = 0; i <= n; ++i) rows[i % 2][i / 2] = p[i];
  for (std::size_t r = 2; r <= n; ++r) {
    const double lead = rows[r - 1][0];
    if (lead == 0.0) return false;
    for (std::size_t k = 0; k + 1 < rows[r].size(); ++k) {
      rows[r][k] = (lead * rows[r - 2][k + 1] - rows[r - 2][0] * rows[r - 1][k + 1]) / lead;
    }
  }
  for (std::size_t r = 0; r <= n; ++r) {
    if (!(rows[r][0] > 0.0)) return false;
  }
  return true;
}

std::vector<double> closed_loop_polynomial(const TransferFunction& g, double k) {
  std::vector<double> p = g.den;
  const std::size_t off = p.size() - g.num.size();
  for (std::size_t i = 0; i < g.num.size(); ++i) p[off + i] += k * g.num[i];
  return p;
}

}  // namespace

TEST_CASE("evaluation of the example plants", "[lti]") {
  CHECK(evaluate(kGs, 0.0).real() == Approx(8.0 / 4.2));
  CHECK(evaluate(kGu, 0.0).real() == Approx(-2.0));
  const Complex v = evaluate(TransferFunction({1}, {1, 1}), Complex(0, 1));
  CHECK(std::abs(v - Complex(0.5, -0.5)) < 1e-15);
}

TEST_CASE("evaluation at a pole is signalled", "[lti]") {
  CHECK_THROWS_AS(evaluate(TransferFunction({1}, {1, 1}), -1.0), EvaluationAtPole);
}

TEST_CASE("transfer function validation names the field", "[lti]") {
  try {
    TransferFunction({1}, {0, 1, 2});
    FAIL("expected an InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("den") != std::string::npos);
  }
  CHECK_THROWS_AS(TransferFunction({1, 2, 3}, {1, 1}), InputError);
  CHECK_THROWS_AS(TransferFunction({1}, {}), InputError);
  CHECK_THROWS_AS(TransferFunction({std::nan("")}, {1, 1}), InputError);
}

TEST_CASE("repeated real root", "[lti]") {
  const auto p = poles(TransferFunction({1}, {1, 2, 1}));
  REQUIRE(p.size() == 2);
  for (const Complex z : p) CHECK(std::abs(z - Complex(-1.0, 0.0)) < 1e-9);
}

TEST_CASE("right half-plane pole counts of the example plants", "[lti]") {
  CHECK(count_rhp_poles(kGu) == 1);
  CHECK(count_rhp_poles(kGs) == 0);
  // Independent oracles: Routh-Hurwitz for G_s, sign change at s = 0 and s -> inf for G_u.
  CHECK(hurwitz(kGs.den));
  CHECK(polyval(kGu.den, 0.0).real() < 0.0);
  for (const auto* g : {&kGs, &kGu}) {
    const auto p = poles(*g);
    REQUIRE(p.size() == 5);
    Complex sum{};
    for (const Complex z : p) {
      CHECK(std::abs(polyval(g->den, z)) < 1e-9);
      sum += z;
    }
    CHECK(sum.real() == Approx(-13.0));
  }
}

TEST_CASE("first-order Nyquist contour is the circle through 0 and 1", "[lti]") {
  const NyquistContour c = nyquist_contour(TransferFunction({1}, {1, 1}));
  CHECK(c.samples.size() >= 1024);
  for (const Complex z : c.samples) CHECK(std::abs(std::abs(z - 0.5) - 0.5) < 1e-9);
  CHECK(std::abs(c.samples.front()) < 1e-12);
  CHECK(std::abs(c.samples.back()) < 1e-12);
  bool has_one = false;
  for (const Complex z : c.samples) has_one = has_one || std::abs(z - 1.0) < 1e-12;
  CHECK(has_one);
}

TEST_CASE("integrator contour is closed by a large clockwise arc", "[lti]") {
  const TransferFunction g({1}, {1, 0});
  const NyquistContour c = nyquist_contour(g);
  REQUIRE(c.indentations.size() == 1);
  double peak = 0.0;
  for (const Complex z : c.samples) peak = std::max(peak, std::abs(z));
  CHECK(peak == Approx(1.0 / kIndentationRadius).epsilon(1e-9));
  CHECK(winding_number(c, 1.0) == 1);
  CHECK(winding_number(c, -1.0) == 0);
  const ExtendedSRG e = extended_srg(g);
  CHECK(e.n_p == 0);
  CHECK(contains(e.encircled, 1.0));
  CHECK_FALSE(contains(e.encircled, -1.0));
}

TEST_CASE("stable plant contour passes through its DC gain", "[lti]") {
  const NyquistContour c = nyquist_contour(kGs);
  bool found = false;
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    if (c.frequencies[i] == 0.0) {
      found = true;
      CHECK(c.samples[i].real() == Approx(8.0 / 4.2));
      CHECK(c.samples[i].imag() == 0.0);
    }
  }
  CHECK(found);
}

TEST_CASE("contour is exactly conjugate symmetric", "[lti]") {
  for (const auto* g : {&kGs, &kGu}) {
    const NyquistContour c = nyquist_contour(*g);
    const std::size_t n = c.samples.size();
    for (std::size_t i = 0; i < n; ++i) CHECK(c.samples[i] == std::conj(c.samples[n - 1 - i]));
  }
}

TEST_CASE("tail settles before the automatic frequency limit", "[lti]") {
  const NyquistContour c = nyquist_contour(kGs);
  double peak = 0.0;
  for (const Complex z : c.samples) peak = std::max(peak, std::abs(z));
  const Complex tail = evaluate(kGs, Complex(0.0, c.omega_max));
  CHECK(std::abs(tail) < 1e-6 * peak);
  CHECK_THROWS_AS(nyquist_contour(kGs, {0.0, 100}), InputError);
}

TEST_CASE("winding numbers on synthetic circles", "[lti]") {
  std::vector<Complex> cw, ccw;
  for (int k = 0; k < 64; ++k) {
    cw.push_back(std::polar(1.0, -2.0 * std::numbers::pi * k / 64));
    ccw.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / 64));
  }
  CHECK(winding_number(cw, 0.0) == 1);
  CHECK(winding_number(cw, 3.0) == 0);
  CHECK(winding_number(ccw, 0.0) == -1);
  CHECK_THROWS_AS(winding_number(cw, 1.0), BoundaryAmbiguity);
  std::vector<Complex> twice = cw;
  twice.insert(twice.end(), cw.begin(), cw.end());
  CHECK(winding_number(twice, Complex(0.1, 0.2)) == 2);
  const ClosedPolyline poly(twice);
  CHECK(poly.clockwise_winding(Complex(0.1, 0.2)) == 2);
}

TEST_CASE("argument principle on a circle around a double pole", "[lti]") {
  const TransferFunction g({1}, {1, 2, 1});
  std::vector<Complex> image;
  for (int k = 0; k < 2048; ++k) {
    const Complex s = -1.0 + std::polar(0.5, 2.0 * std::numbers::pi * k / 2048);
    image.push_back(evaluate(g, s));
  }
  // Counter-clockwise s-circle, two poles inside: the image winds twice clockwise.
  CHECK(winding_number(image, 0.0) == 2);
}

TEST_CASE("extended SRG of a stable first-order plant", "[lti]") {
  const ExtendedSRG e = extended_srg(TransferFunction({1}, {1, 1}));
  CHECK(e.n_p == 0);
  CHECK(contains(e.region(), 1.0));
  CHECK(contains(e.region(), Complex(0.5, 0.5)));
  // The gain -2 = -1/0.5 destabilises 1/(s+1), so 0.5 is encircled; negative reals are not.
  CHECK(contains(e.encircled, 0.5));
  CHECK_FALSE(contains(e.encircled, -1.0));
  CHECK_FALSE(contains(e.encircled, 2.0));
}

TEST_CASE("unstable plant: encircled set agrees with closed-loop stability", "[lti]") {
  const ExtendedSRG e = extended_srg(kGu);
  REQUIRE(e.n_p == 1);
  CHECK(contains_infinity(e.encircled));
  // -1/k lies outside SRG' exactly when 1 + k G_u is stable.
  for (double k = -3.0; k <= 6.0; k += 0.05) {
    if (std::abs(k) < 1e-9) continue;
    const Complex z = -1.0 / k;
    if (e.contour.polyline->distance(z) < 1e-6) continue;
    const bool stable = hurwitz(closed_loop_polynomial(kGu, k));
    CHECK(contains(e.encircled, z) == !stable);
  }
}

TEST_CASE("inverted extended SRG contains the inverted Nyquist samples", "[lti]") {
  const TransferFunction g({1}, {1, 1});
  const Region inv = inverted_extended_srg(g);
  for (double w : {0.0, 0.1, 1.0, 3.0, 100.0}) CHECK(contains(inv, invert_point(evaluate(g, Complex(0, w)))));
  CHECK(contains_infinity(inv));
  CHECK_FALSE(contains(inv, 0.5));
}

TEST_CASE("unit gain: SRG' and its inverse are the point 1", "[lti]") {
  const TransferFunction g({1}, {1});
  const Region inv = inverted_extended_srg(g);
  CHECK(contains(inv, 1.0));
  CHECK_FALSE(contains(inv, 1.01));
  CHECK(region_distance(inv, make_point(3.0)) == Approx(2.0));
}

TEST_CASE("controllable canonical realisations", "[lti]") {
  const StateSpace a = to_state_space(TransferFunction({1}, {1, 1}));
  CHECK(a.A(0, 0) == -1.0);
  CHECK(a.B(0) == 1.0);
  CHECK(a.C(0) == 1.0);
  CHECK(a.D == 0.0);
  const StateSpace b = to_state_space(TransferFunction({1, 2}, {1, 1}));
  CHECK(b.D == 1.0);
  CHECK(b.A(0, 0) == -1.0);
  CHECK(b.C(0) == 1.0);
  const StateSpace s = to_state_space(kGs);
  for (double w : {0.1, 1.0, 10.0}) {
    CHECK(std::abs(frequency_response(s, Complex(0, w)) - evaluate(kGs, Complex(0, w))) < 1e-8);
  }
  const StateSpace constant = to_state_space(TransferFunction({3}, {2}));
  CHECK(constant.order() == 0);
  CHECK(frequency_response(constant, Complex(0, 1)) == Complex(1.5, 0));
}

TEST_CASE("realisation round trip", "[lti]") {
  for (const auto* g : {&kGs, &kGu}) {
    const TransferFunction back = to_transfer_function(to_state_space(*g));
    REQUIRE(back.den.size() == g->den.size());
    for (std::size_t i = 0; i < g->den.size(); ++i) CHECK(back.den[i] == Approx(g->den[i]).margin(1e-10));
    REQUIRE(back.num.size() == g->num.size());
    for (std::size_t i = 0; i < g->num.size(); ++i) CHECK(back.num[i] == Approx(g->num[i]).margin(1e-10));
  }
}
