#pragma once

// Local HTTP API: /plant, /evaluate, /simulate, /design.
// Plant geometry is computed once per session; evaluate only redoes the
// controller-side region and the distance.

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>

#include "srg/analysis.hpp"
#include "srg/design.hpp"
#include "srg/errors.hpp"
#include "srg/io.hpp"
#include "srg/simulator.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines the macro _res.
#include <httplib.h>

namespace srg {

inline constexpr double kMaxServiceHorizon = 120.0;

class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message) : std::runtime_error(message), status(status) {}
  int status;
};

class Service {
 public:
  using json = io::json;

  /// Body: plant document, optional "session" (reload), "omega_max", "samples".
  json handle_plant(const json& body) {
    auto geom = guarded([&] {
      const TransferFunction g = io::plant_from_json(body);
      return make_plant_geometry(g, grid_options(body));
    });
    std::string id;
    {
      std::unique_lock lock(sessions_mutex_);
      if (body.contains("session")) {
        id = text(body, "session");
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw ServiceError(404, "session: unknown session '" + id + "'");
        std::atomic_store(&it->second->geometry, std::shared_ptr<const PlantGeometry>(geom));
      } else {
        id = "s" + std::to_string(++next_id_);
        auto s = std::make_shared<Session>();
        s->geometry = geom;
        sessions_.emplace(id, std::move(s));
      }
    }
    json poles = json::array();
    for (const Complex p : geom->poles) poles.push_back(io::point(p));
    return {{"session", id},
            {"n_p", geom->esrg.n_p},
            {"poles", poles},
            {"omega_max", geom->esrg.contour.omega_max},
            {"nyquist", io::polyline(srg::detail::thin(geom->esrg.contour.samples, io::kBoundaryPoints))}};
  }

  /// Body: session, kp, kr, gamma_hat (optional, default inf).
  json handle_evaluate(const json& body) {
    auto geom = geometry(body);
    const double kp = real(body, "kp");
    const double kr = real(body, "kr");
    const double gamma_hat = body.contains("gamma_hat") ? real(body, "gamma_hat") : kInfinity;
    const Feasibility f = guarded([&] { return feasibility(*geom, kp, kr, gamma_hat); });
    return {{"separation", io::number(f.separation)},
            {"gain_bound", io::number(f.report.gain_bound)},
            {"certified", f.report.certified},
            {"feasible", f.feasible},
            {"report", io::report_to_json(f.report)},
            {"controller_region", io::region_to_json(f.report.negated_bound)}};
  }

  /// Body: session, kp, kr, horizon, variant ("reset" | "lti"), reference_amplitude.
  json handle_simulate(const json& body) {
    auto session = find(body);
    auto geom = std::atomic_load(&session->geometry);
    const double horizon = real(body, "horizon");
    if (!(horizon > 0.0) || horizon > kMaxServiceHorizon) {
      throw ServiceError(400, "horizon: must lie in (0, 120] seconds");
    }
    const std::string variant = body.contains("variant") ? text(body, "variant") : "reset";
    if (variant != "reset" && variant != "lti") throw ServiceError(400, "variant: expected 'reset' or 'lti'");
    const double amplitude = body.contains("reference_amplitude") ? real(body, "reference_amplitude") : 1.0;

    LureLoop loop;
    loop.plant = geom->plant;
    loop.kp = real(body, "kp");
    loop.kr = real(body, "kr");
    loop.reset_enabled = variant == "reset";
    loop.reference = Signal::step(amplitude);

    std::lock_guard queue(session->simulation_mutex);
    return guarded([&]() -> json {
      try {
        const Trajectory t = simulate_closed_loop(loop, horizon);
        return {{"verdict", "bounded"}, {"variant", variant}, {"trajectory", io::trajectory_to_json(t)}};
      } catch (const DivergenceError& e) {
        return {{"verdict", "diverged"},
                {"variant", variant},
                {"diverged_at", e.time},
                {"diagnosis", e.what()},
                {"trajectory", io::trajectory_to_json(e.partial)}};
      }
    });
  }

  /// Body: session, mode ("min-kp" | "max-kr"), gamma_hat, kr or kp, optional
  /// kp_range [lo, hi], kr_max, direction.
  json handle_design(const json& body) {
    auto geom = geometry(body);
    const std::string mode = body.contains("mode") ? text(body, "mode") : "min-kp";
    const double gamma_hat = real(body, "gamma_hat");
    return guarded([&]() -> json {
      if (mode == "min-kp") {
        double lo = 0.0, hi = 10.0;
        if (body.contains("kp_range")) {
          const auto r = io::detail::real_list(body["kp_range"], "kp_range");
          if (r.size() != 2) throw InputError("kp_range: expected [lo, hi]");
          lo = r[0];
          hi = r[1];
        }
        return io::design_to_json(find_min_kp(*geom, real(body, "kr"), gamma_hat, lo, hi), true);
      }
      if (mode == "max-kr") {
        const double kr_max = body.contains("kr_max") ? real(body, "kr_max") : 10.0;
        return io::design_to_json(
            find_max_abs_kr(*geom, real(body, "kp"), gamma_hat, direction(body), kr_max), true);
      }
      throw InputError("mode: expected 'min-kp' or 'max-kr'");
    });
  }

  std::size_t session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
  }

  void mount(httplib::Server& server) {
    auto route = [this](json (Service::*handler)(const json&)) {
      return [this, handler](const httplib::Request& req, httplib::Response& res) {
        int status = 200;
        json out;
        try {
          out = (this->*handler)(io::parse(req.body, "body"));
        } catch (const ServiceError& e) {
          status = e.status;
          out = {{"error", e.what()}};
        } catch (const InputError& e) {
          status = 400;
          out = {{"error", e.what()}};
        } catch (const std::exception& e) {
          status = 500;
          out = {{"error", e.what()}};
        }
        res.status = status;
        res.set_content(out.dump(), "application/json");
        res.set_header("Access-Control-Allow-Origin", "*");
      };
    };
    server.Post("/plant", route(&Service::handle_plant));
    server.Post("/evaluate", route(&Service::handle_evaluate));
    server.Post("/simulate", route(&Service::handle_simulate));
    server.Post("/design", route(&Service::handle_design));
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.set_header("Access-Control-Allow-Methods", "POST, OPTIONS");
      res.status = 204;
    });
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"status":"ok"})", "application/json");
    });
  }

 private:
  struct Session {
    std::shared_ptr<const PlantGeometry> geometry;
    std::mutex simulation_mutex;
  };

  template <class F>
  static auto guarded(F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const InputError& e) {
      throw ServiceError(400, e.what());
    } catch (const std::invalid_argument& e) {
      throw ServiceError(400, e.what());
    } catch (const EvaluationAtPole& e) {
      throw ServiceError(422, e.what());
    } catch (const std::runtime_error& e) {
      if (dynamic_cast<const ServiceError*>(&e)) throw;
      throw ServiceError(422, e.what());
    }
  }

  static double real(const json& body, const std::string& name) {
    if (!body.is_object() || !body.contains(name)) throw ServiceError(400, name + ": missing field");
    const json& v = body[name];
    if (v.is_null() && name == "gamma_hat") return kInfinity;
    if (!v.is_number()) throw ServiceError(400, name + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ServiceError(400, name + ": must be finite");
    return d;
  }

  static std::string text(const json& body, const std::string& name) {
    if (!body.is_object() || !body.contains(name)) throw ServiceError(400, name + ": missing field");
    const json& v = body[name];
    if (!v.is_string()) throw ServiceError(400, name + ": expected a string");
    return v.get<std::string>();
  }

  static NyquistOptions grid_options(const json& body) {
    NyquistOptions opt;
    if (body.contains("omega_max")) opt.omega_max = io::detail::real_value(body["omega_max"], "omega_max");
    if (body.contains("samples")) {
      if (!body["samples"].is_number_integer()) throw InputError("samples: expected an integer");
      opt.samples_per_side = body["samples"].get<int>();
    }
    return opt;
  }

  static KrDirection direction(const json& body) {
    if (!body.contains("direction")) return KrDirection::both;
    const std::string d = text(body, "direction");
    if (d == "negative") return KrDirection::negative;
    if (d == "positive") return KrDirection::positive;
    if (d == "both") return KrDirection::both;
    throw InputError("direction: expected 'negative', 'positive' or 'both'");
  }

  std::shared_ptr<Session> find(const json& body) const {
    if (!body.is_object() || !body.contains("session")) throw ServiceError(400, "session: missing field");
    const std::string id = text(body, "session");
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "session: unknown session '" + id + "'");
    return it->second;
  }

  std::shared_ptr<const PlantGeometry> geometry(const json& body) const {
    auto s = find(body);
    return std::atomic_load(&s->geometry);
  }

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_id_ = 0;
};

}  // namespace srg
