#include <catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "srg/simulator.hpp"

using namespace srg;
using Catch::Approx;

namespace {

const TransferFunction kGs({14, 8}, {1, 13, 58, 96, 34, 4.2});
const TransferFunction kGu({14, 8}, {1, 13, 58, 96, 34, -4});

/// Linear system whose quadratic form is always positive, so it never jumps.
ResetSystem never_resets(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  Eigen::VectorXd B = Eigen::VectorXd::Zero(n);
  B(0) = 1.0;
  Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(n);
  C(0) = 1.0;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n + 1, n + 1);
  return make_reset_system(A, B, C, 0.0, Eigen::MatrixXd::Zero(n, n), M);
}

/// Exact flow for constant input u from x0 over t: augmented matrix exponential.
Eigen::VectorXd exact_flow(const ResetSystem& s, const Eigen::VectorXd& x0, double u, double t) {
  const Eigen::Index n = s.order();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = s.A * t;
  aug.topRightCorner(n, 1) = s.B * u * t;
  Eigen::VectorXd z(n + 1);
  z << x0, 1.0;
  const Eigen::MatrixXd e = aug.exp();
  return (e * z).head(n);
}

double harmonic_error(double dt) {
  Eigen::MatrixXd A(2, 2);
  A << 0, 1, -1, 0;
  Eigen::VectorXd x0(2);
  x0 << 1, 0;
  SimulationOptions opt;
  opt.dt_max = dt;
  const Trajectory t = simulate_reset(never_resets(A), Signal::step(0.0), 10.0, opt, x0);
  return std::abs(t.states.back()(0) - std::cos(10.0));
}

}  // namespace

TEST_CASE("signals", "[simulator]") {
  const Signal s = Signal::step(2.0, 1.0, 3.0);
  CHECK(s.at(0.5) == 0.0);
  CHECK(s.at(1.0) == 2.0);
  CHECK(s.at(1.0, -1) == 0.0);
  CHECK(s.at(2.9) == 2.0);
  CHECK(s.at(3.0) == 0.0);
  CHECK(s.at(3.0, -1) == 2.0);
  CHECK(s.breakpoints() == std::vector<double>{0.0, 1.0, 3.0});
  const Signal w = Signal::sinusoid(1.0, 2.0);
  CHECK(w.at(0.25) == Approx(std::sin(0.5)));
  const Signal p = Signal::samples({0.0, 1.0, 2.0}, {0.0, 2.0, 0.0});
  CHECK(p.at(0.5) == Approx(1.0));
  CHECK(p.at(1.5) == Approx(1.0));
  CHECK(p.at(2.5) == 0.0);
  CHECK(Signal::step(0.0).is_zero());
  CHECK_THROWS_AS(Signal::samples({0.0, 0.0}, {1.0, 1.0}), InputError);
  CHECK_THROWS_AS(Signal::step(1.0, 0.0, 0.0), InputError);
}

TEST_CASE("zero input from rest stays at rest", "[simulator]") {
  const Trajectory t = simulate_reset(make_sore(), Signal::step(0.0), 5.0);
  for (const auto& x : t.states) CHECK(x.isZero());
  CHECK(t.jumps.empty());
}

TEST_CASE("SORE step response matches the exact flow between jumps", "[simulator]") {
  const ResetSystem s = make_sore();
  const Trajectory t = simulate_reset(s, Signal::step(1.0), 20.0);
  REQUIRE(t.jumps.size() >= 2);
  double anchor_time = 0.0;
  Eigen::VectorXd anchor = Eigen::VectorXd::Zero(2);
  std::size_t next_jump = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.jump_flags[i] == 1) {
      anchor_time = t.jumps[next_jump].time;
      anchor = t.jumps[next_jump].post;
      ++next_jump;
      continue;
    }
    if (i % 37 != 0) continue;
    worst = std::max(worst, (t.states[i] - exact_flow(s, anchor, 1.0, t.times[i] - anchor_time)).norm());
  }
  CHECK(worst < 1e-6);
  CHECK(next_jump == t.jumps.size());
}

TEST_CASE("jumps land on the guard and apply the reset map", "[simulator]") {
  const ResetSystem s = make_sore();
  const Trajectory t = simulate_reset(s, Signal::step(1.0), 20.0);
  REQUIRE_FALSE(t.jumps.empty());
  for (const JumpRecord& j : t.jumps) {
    CHECK(std::abs(quadratic_form(s, j.pre, 1.0)) < 1e-8);
    CHECK((j.post - s.RJ * j.pre).norm() == 0.0);
  }
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t.times[i] >= t.times[i - 1]);
}

TEST_CASE("RK4 error shrinks at fourth order", "[simulator]") {
  const double e1 = harmonic_error(0.1);
  const double e2 = harmonic_error(0.05);
  const double e3 = harmonic_error(0.025);
  CHECK(e1 / e2 > 10.0);
  CHECK(e1 / e2 < 22.0);
  CHECK(e2 / e3 > 10.0);
  CHECK(e2 / e3 < 22.0);
}

TEST_CASE("simulation is deterministic", "[simulator]") {
  LureLoop loop{kGu, 2.35, -1.0};
  const Trajectory a = simulate_closed_loop(loop, 10.0);
  const Trajectory b = simulate_closed_loop(loop, 10.0);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.outputs[i] == b.outputs[i]);
    CHECK(a.states[i] == b.states[i]);
  }
}

TEST_CASE("runaway jumping is reported", "[simulator]") {
  const ResetSystem s = make_reset_system(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1),
                                          Eigen::RowVectorXd::Ones(1), 0.0, Eigen::MatrixXd::Identity(1, 1),
                                          -Eigen::MatrixXd::Identity(2, 2));
  SimulationOptions opt;
  opt.max_jumps = 100;
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  CHECK_THROWS_AS(simulate_reset(s, Signal::step(0.0), 1.0, opt, x0), ZenoError);
}

TEST_CASE("unstable loop diverges with a partial trajectory", "[simulator]") {
  LureLoop loop{TransferFunction({1}, {1, -1}), 0.0, 0.0};
  try {
    simulate_closed_loop(loop, 100.0);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    // e^t exceeds 1e9 near t = ln(1e9).
    CHECK(e.time == Approx(std::log(1e9 + 1.0)).margin(0.01));
    CHECK_FALSE(e.partial.times.empty());
  }
}

TEST_CASE("closed-loop output of a static gain loop", "[simulator]") {
  // G = 1/(s+1) with kp = 1: y -> 1/2 with rate 2.
  LureLoop loop{TransferFunction({1}, {1, 1}), 1.0, 0.0};
  const Trajectory t = simulate_closed_loop(loop, 3.0);
  CHECK(t.outputs.back() == Approx(0.5 * (1.0 - std::exp(-6.0))).margin(1e-9));
  CHECK(t.errors.back() == Approx(1.0 - t.outputs.back()).margin(1e-12));
}

TEST_CASE("example loops stay bounded", "[simulator]") {
  for (const LureLoop& loop : {LureLoop{kGu, 2.35, -1.0}, LureLoop{kGu, 1.0, 1.1}, LureLoop{kGs, 0.0, 1.0}}) {
    const Trajectory t = simulate_closed_loop(loop, 30.0);
    double peak = 0.0;
    for (double y : t.outputs) peak = std::max(peak, std::abs(y));
    CHECK(peak < 100.0);
  }
}

TEST_CASE("empirical gain of a unit feedthrough is one", "[simulator]") {
  LureLoop loop{TransferFunction({1}, {1}), 0.0, 0.0};
  CHECK(l2_gain_estimate(loop, probe_battery(), kProbeHorizon) == Approx(1.0).margin(1e-9));
}

TEST_CASE("short horizons are rejected by the tail check", "[simulator]") {
  LureLoop loop{TransferFunction({1}, {1, 0.01}), 0.0, 0.0};
  CHECK_THROWS_AS(l2_gain_estimate(loop, probe_battery(), 31.0), HorizonTooShort);
}

TEST_CASE("empirical gains respect the certified bounds", "[simulator]") {
  const auto probes = probe_battery();
  CHECK(l2_gain_estimate(LureLoop{kGs, 0.0, 1.0}, probes, kProbeHorizon) <= 47.6);
  CHECK(l2_gain_estimate(LureLoop{kGu, 2.35, -1.0}, probes, kProbeHorizon) <= 1.0);
}

TEST_CASE("probe battery", "[simulator]") {
  const auto probes = probe_battery();
  REQUIRE(probes.size() == 5);
  const auto again = probe_battery();
  CHECK(probes[4].sample_values() == again[4].sample_values());
  CHECK(probes[4].sample_values().front() == 0.0);
  CHECK(probes[4].sample_values().back() == 0.0);
  for (const Signal& p : probes) CHECK(p.at(kProbeDuration + 1.0) == 0.0);
}
