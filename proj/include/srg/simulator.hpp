#pragma once

// Hybrid time-domain simulation: RK4 flow, guard bisection, dwell-time
// re-arming. Covers standalone reset systems and Lur'e loops
// e = r - phi(y), y = G e with phi = kp + kr * R.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "srg/errors.hpp"
#include "srg/lti.hpp"
#include "srg/reset_system.hpp"

namespace srg {

// ---------------------------------------------------------------------------
// Signals

class Signal {
 public:
  enum class Kind { step, sinusoid, samples };

  static Signal step(double amplitude, double start_time = 0.0, double duration = kInfinity) {
    Signal s(Kind::step, duration);
    s.amplitude_ = amplitude;
    s.start_ = start_time;
    return s;
  }

  static Signal sinusoid(double amplitude, double frequency, double phase = 0.0, double duration = kInfinity) {
    Signal s(Kind::sinusoid, duration);
    s.amplitude_ = amplitude;
    s.frequency_ = frequency;
    s.phase_ = phase;
    return s;
  }

  /// Piecewise-linear through (times, values); zero outside the sampled span.
  static Signal samples(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.size() < 2) {
      throw InputError("samples: need matching times/values with at least two entries");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) throw InputError("samples: times must be strictly increasing");
    }
    Signal s(Kind::samples, times.back());
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    return s;
  }

  Kind kind() const { return kind_; }
  double duration() const { return duration_; }
  double amplitude() const { return amplitude_; }
  double start_time() const { return start_; }
  double frequency() const { return frequency_; }
  double phase() const { return phase_; }
  const std::vector<double>& sample_times() const { return times_; }
  const std::vector<double>& sample_values() const { return values_; }

  /// Value at t; side < 0 takes the left limit at discontinuities.
  double at(double t, int side = 1) const {
    const bool active = side > 0 ? (t >= 0.0 && t < duration_) : (t > 0.0 && t <= duration_);
    if (!active) return 0.0;
    switch (kind_) {
      case Kind::step:
        return (side > 0 ? t >= start_ : t > start_) ? amplitude_ : 0.0;
      case Kind::sinusoid:
        return amplitude_ * std::sin(frequency_ * t + phase_);
      case Kind::samples: {
        if (t < times_.front() || t > times_.back()) return 0.0;
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        if (it == times_.end()) return values_.back();
        const std::size_t i = static_cast<std::size_t>(it - times_.begin());
        if (i == 0) return values_.front();
        const double f = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
        return values_[i - 1] + f * (values_[i] - values_[i - 1]);
      }
    }
    return 0.0;
  }

  /// Times where the signal or its slope may be discontinuous.
  std::vector<double> breakpoints() const {
    std::vector<double> out{0.0};
    if (kind_ == Kind::step) out.push_back(start_);
    if (kind_ == Kind::samples) out.insert(out.end(), times_.begin(), times_.end());
    if (duration_ < kInfinity) out.push_back(duration_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool is_zero() const {
    if (kind_ == Kind::samples) {
      return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    }
    return amplitude_ == 0.0;
  }

 private:
  Signal(Kind kind, double duration) : kind_(kind), duration_(duration) {
    if (!(duration > 0.0)) throw InputError("duration: must be positive");
  }

  Kind kind_;
  double duration_;
  double amplitude_ = 0.0;
  double start_ = 0.0;
  double frequency_ = 0.0;
  double phase_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Trajectory

struct JumpRecord {
  double time = 0.0;
  Eigen::VectorXd pre;
  Eigen::VectorXd post;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> outputs;     // y
  std::vector<double> errors;      // e (plant input; the input u for a lone reset system)
  std::vector<double> references;  // r (u for a lone reset system)
  std::vector<int> jump_flags;
  std::vector<JumpRecord> jumps;
  Eigen::Index plant_order = 0;

  std::size_t size() const { return times.size(); }
};

class DivergenceError : public SimulationError {
 public:
  DivergenceError(double time, Trajectory partial)
      : SimulationError("unstable closed loop: state norm exceeded 1e9 at t=" + std::to_string(time)),
        time(time),
        partial(std::move(partial)) {}
  double time;
  Trajectory partial;
};

struct SimulationOptions {
  double dt_max = 1e-3;
  double dwell_time = 1e-6;
  double guard_tolerance = 1e-10;
  std::size_t max_jumps = 1'000'000;
  double divergence_limit = 1e9;
};

// ---------------------------------------------------------------------------
// Generic hybrid engine

namespace detail {

struct HybridModel {
  Eigen::Index n = 0;
  std::function<void(double t, int side, const Eigen::VectorXd& x, Eigen::VectorXd& dx)> flow;
  std::function<double(double t, const Eigen::VectorXd& x)> guard;  // jump set: guard <= 0
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x)> reset;
  bool resets = true;
  std::function<void(double t, const Eigen::VectorXd& x, double& y, double& e, double& r)> observe;
};

inline Eigen::VectorXd rk4_step(const HybridModel& m, double t, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd k1(m.n), k2(m.n), k3(m.n), k4(m.n);
  m.flow(t, 1, x, k1);
  m.flow(t + 0.5 * h, 1, x + 0.5 * h * k1, k2);
  m.flow(t + 0.5 * h, 1, x + 0.5 * h * k2, k3);
  m.flow(t + h, -1, x + h * k3, k4);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Trajectory run_hybrid(const HybridModel& m, const Eigen::VectorXd& x0, double horizon,
                             const std::vector<double>& breakpoints, const SimulationOptions& opt) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("horizon: must be positive and finite");
  if (!(opt.dt_max > 0.0)) throw InputError("dt_max: must be positive");

  Trajectory traj;
  auto record = [&](double t, const Eigen::VectorXd& x, int flag) {
    double y = 0, e = 0, r = 0;
    m.observe(t, x, y, e, r);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.outputs.push_back(y);
    traj.errors.push_back(e);
    traj.references.push_back(r);
    traj.jump_flags.push_back(flag);
  };
  auto check_divergence = [&](double t, const Eigen::VectorXd& x) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > opt.divergence_limit) {
      throw DivergenceError(t, std::move(traj));
    }
  };

  std::vector<double> stops;
  for (double b : breakpoints) {
    if (b > 0.0 && b < horizon) stops.push_back(b);
  }
  stops.push_back(horizon);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  double t = 0.0;
  Eigen::VectorXd x = x0;
  bool armed = false;
  double last_jump = -kInfinity;
  std::size_t next_stop = 0;
  record(t, x, 0);

  auto apply_jump = [&](double tj, const Eigen::VectorXd& pre) {
    if (traj.jumps.size() >= opt.max_jumps) throw ZenoError(tj, traj.jumps.size());
    Eigen::VectorXd post = m.reset(pre);
    traj.jumps.push_back({tj, pre, post});
    armed = false;
    last_jump = tj;
    return post;
  };

  while (t < horizon) {
    while (next_stop < stops.size() && stops[next_stop] <= t) ++next_stop;
    const double stop = stops[next_stop];
    const double h = std::min(opt.dt_max, stop - t);
    const double t_new = (stop - t <= opt.dt_max) ? stop : t + h;
    Eigen::VectorXd x_new = rk4_step(m, t, x, t_new - t);
    check_divergence(t_new, x_new);

    if (m.resets) {
      const double g_new = m.guard(t_new, x_new);
      if (armed && g_new <= 0.0) {
        double lo = 0.0, hi = t_new - t;
        Eigen::VectorXd x_hi = x_new;
        double g_hi = g_new;
        for (int it = 0; it < 200 && std::abs(g_hi) >= opt.guard_tolerance && hi - lo > 0.0; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          Eigen::VectorXd x_mid = rk4_step(m, t, x, mid);
          const double g_mid = m.guard(t + mid, x_mid);
          if (g_mid <= 0.0) {
            hi = mid;
            x_hi = std::move(x_mid);
            g_hi = g_mid;
          } else {
            lo = mid;
          }
        }
        const double tj = t + hi;
        x = apply_jump(tj, x_hi);
        if (tj > traj.times.back()) {
          record(tj, x, 1);
        } else {
          traj.states.back() = x;
          traj.jump_flags.back() = 1;
        }
        t = tj;
        continue;
      }
      const bool dwell_ok = t_new - last_jump >= opt.dwell_time;
      if (!armed && dwell_ok && g_new < -opt.guard_tolerance) {
        x = apply_jump(t_new, x_new);
        t = t_new;
        record(t, x, 1);
        continue;
      }
      if (!armed && dwell_ok && g_new > 0.0) armed = true;
    }
    t = t_new;
    x = std::move(x_new);
    record(t, x, 0);
  }
  return traj;
}

}  // namespace detail

/// Open-loop response of a reset system to u from x(0) = x0 (default 0).
inline Trajectory simulate_reset(const ResetSystem& sys, const Signal& u, double horizon,
                                 const SimulationOptions& opt = {}, Eigen::VectorXd x0 = {}) {
  sys.validate();
  const Eigen::Index n = sys.order();
  if (x0.size() == 0) x0 = Eigen::VectorXd::Zero(n);
  if (x0.size() != n) throw InputError("x0: dimension mismatch");
  detail::HybridModel m;
  m.n = n;
  m.flow = [&](double t, int side, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx.noalias() = sys.A * x + sys.B * u.at(t, side);
  };
  m.guard = [&](double t, const Eigen::VectorXd& x) { return quadratic_form(sys, x, u.at(t)); };
  m.reset = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return sys.RJ * x; };
  m.observe = [&](double t, const Eigen::VectorXd& x, double& y, double& e, double& r) {
    const double ut = u.at(t);
    y = sys.C.dot(x) + sys.D * ut;
    e = ut;
    r = ut;
  };
  Trajectory traj = detail::run_hybrid(m, x0, horizon, u.breakpoints(), opt);
  traj.plant_order = 0;
  return traj;
}

/// Plant G in negative feedback with phi = kp + kr * R (or kr times the
/// base-linear part of R when resets are disabled).
struct LureLoop {
  TransferFunction plant;
  double kp = 0.0;
  double kr = 0.0;
  ResetSystem reset = make_sore();
  bool reset_enabled = true;
  Signal reference = Signal::step(1.0);
};

inline Trajectory simulate_closed_loop(const LureLoop& loop, double horizon, const SimulationOptions& opt = {}) {
  loop.reset.validate();
  const StateSpace p = to_state_space(loop.plant);
  const ResetSystem& c = loop.reset;
  const Eigen::Index np = p.order();
  const Eigen::Index nc = c.order();
  const double denom = 1.0 + p.D * (loop.kp + loop.kr * c.D);
  if (std::abs(denom) < 1e-12) throw InputError("loop: algebraic loop is ill-posed (1 + D (kp + kr Dr) = 0)");

  const double kr = loop.kr;
  const double kp = loop.kp;
  const Signal& ref = loop.reference;
  // y = (Cp xp + Dp (r - kr Cr xr)) / (1 + Dp (kp + kr Dr)); e = r - kp y - kr (Cr xr + Dr y)
  auto solve = [&, denom](double r, const Eigen::VectorXd& x, double& y, double& e) {
    const double cr = nc > 0 ? c.C.dot(x.tail(nc)) : 0.0;
    const double cp = np > 0 ? p.C.dot(x.head(np)) : 0.0;
    y = (cp + p.D * (r - kr * cr)) / denom;
    e = r - kp * y - kr * (cr + c.D * y);
  };

  detail::HybridModel m;
  m.n = np + nc;
  m.flow = [&, solve](double t, int side, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    double y, e;
    solve(ref.at(t, side), x, y, e);
    if (np > 0) dx.head(np).noalias() = p.A * x.head(np) + p.B * e;
    if (nc > 0) dx.tail(nc).noalias() = c.A * x.tail(nc) + c.B * y;
  };
  m.guard = [&, solve](double t, const Eigen::VectorXd& x) {
    double y, e;
    solve(ref.at(t), x, y, e);
    return quadratic_form(c, x.tail(nc), y);
  };
  m.reset = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    Eigen::VectorXd out = x;
    out.tail(nc) = c.RJ * x.tail(nc);
    return out;
  };
  m.resets = loop.reset_enabled && kr != 0.0;
  m.observe = [&, solve](double t, const Eigen::VectorXd& x, double& y, double& e, double& r) {
    r = ref.at(t);
    solve(r, x, y, e);
  };
  Trajectory traj = detail::run_hybrid(m, Eigen::VectorXd::Zero(np + nc), horizon, ref.breakpoints(), opt);
  traj.plant_order = np;
  return traj;
}

// ---------------------------------------------------------------------------
// Empirical L2 gain

inline double trapezoid_energy(const std::vector<double>& t, const std::vector<double>& v, std::size_t from = 0) {
  double acc = 0.0;
  for (std::size_t i = std::max<std::size_t>(from, 1); i < t.size(); ++i) {
    acc += 0.5 * (t[i] - t[i - 1]) * (v[i] * v[i] + v[i - 1] * v[i - 1]);
  }
  return acc;
}

inline constexpr double kProbeDuration = 30.0;
inline constexpr double kProbeHorizon = 90.0;
inline constexpr unsigned kProbeSeed = 20240611u;

/// Step, sinusoids at 0.1/1/10 rad/s and seeded piecewise-linear noise.
inline std::vector<Signal> probe_battery(double duration = kProbeDuration, unsigned seed = kProbeSeed) {
  std::vector<Signal> out;
  out.push_back(Signal::step(1.0, 0.0, duration));
  for (double w : {0.1, 1.0, 10.0}) out.push_back(Signal::sinusoid(1.0, w, 0.0, duration));
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> times, values;
  for (double t = 0.0; t <= duration + 1e-12; t += 0.1) {
    times.push_back(t);
    values.push_back(noise(rng));
  }
  values.front() = 0.0;
  values.back() = 0.0;
  out.push_back(Signal::samples(times, values));
  return out;
}

struct GainEstimate {
  double gain = 0.0;
  std::vector<double> per_probe;
};

/// max over probes of ||y||_2 / ||r||_2 (inf if a probe diverges).
inline GainEstimate l2_gain_probes(const LureLoop& loop, const std::vector<Signal>& probes, double horizon,
                                   const SimulationOptions& opt = {}) {
  if (probes.empty()) throw InputError("probes: list is empty");
  GainEstimate out;
  for (const Signal& probe : probes) {
    LureLoop l = loop;
    l.reference = probe;
    double ratio = kInfinity;
    try {
      const Trajectory tr = simulate_closed_loop(l, horizon, opt);
      const double er = trapezoid_energy(tr.times, tr.references);
      if (!(er > 0.0)) throw InputError("probes: reference has zero energy");
      const double ey = trapezoid_energy(tr.times, tr.outputs);
      if (ey > 0.0) {
        const double t_tail = 0.9 * horizon;
        const auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t_tail);
        const double tail = trapezoid_energy(tr.times, tr.outputs, static_cast<std::size_t>(it - tr.times.begin()));
        if (tail >= 0.01 * ey) throw HorizonTooShort("horizon too short: output tail holds over 1% of the energy");
      }
      ratio = std::sqrt(ey / er);
    } catch (const DivergenceError&) {
      ratio = kInfinity;
    }
    out.per_probe.push_back(ratio);
    out.gain = std::max(out.gain, ratio);
  }
  return out;
}

inline double l2_gain_estimate(const LureLoop& loop, const std::vector<Signal>& probes, double horizon,
                               const SimulationOptions& opt = {}) {
  return l2_gain_probes(loop, probes, horizon, opt).gain;
}

}  // namespace srg
