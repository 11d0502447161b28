#pragma once

// srgtool front end: analyze, design, simulate, nyquist, serve.
// Exit codes: 0 success / certified, 1 analytic negative, 2 usage or input error.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "srg/analysis.hpp"
#include "srg/design.hpp"
#include "srg/errors.hpp"
#include "srg/io.hpp"
#include "srg/service.hpp"
#include "srg/simulator.hpp"

namespace srg::cli {

enum ExitCode : int { kOk = 0, kNegative = 1, kInputError = 2 };

struct RunConfig {
  std::string command;
  std::string plant_file;
  std::string reset_system_file;
  std::string out_dir = ".";
  std::string mode = "min-kp";
  std::string variant = "both";
  std::string direction = "both";
  std::string host = "127.0.0.1";
  std::string config_file;
  double kp = std::nan("");
  double kr = std::nan("");
  double alpha = kSoreAlpha;
  double gamma_hat = std::nan("");
  double horizon = 30.0;
  double omega_max = 0.0;
  double reference_amplitude = 1.0;
  double kp_min = std::nan("");
  double kp_max = 10.0;
  double kr_max = 10.0;
  bool signed_search = false;
  int samples = kDefaultSamplesPerSide;
  int serve_port = 8080;
};

namespace detail {

using json = io::json;

struct Binding {
  std::string key;
  CLI::App* owner;
  CLI::Option* option;
  std::function<void(const json&)> assign;
};

inline std::function<void(const json&)> assign_real(double& target, std::string key) {
  return [&target, key](const json& v) { target = io::detail::real_value(v, key); };
}

inline std::function<void(const json&)> assign_int(int& target, std::string key) {
  return [&target, key](const json& v) {
    if (!v.is_number_integer()) throw InputError(key + ": expected an integer");
    target = v.get<int>();
  };
}

inline std::function<void(const json&)> assign_text(std::string& target, std::string key) {
  return [&target, key](const json& v) {
    if (!v.is_string()) throw InputError(key + ": expected a string");
    target = v.get<std::string>();
  };
}

inline std::function<void(const json&)> assign_flag(bool& target, std::string key) {
  return [&target, key](const json& v) {
    if (!v.is_boolean()) throw InputError(key + ": expected true or false");
    target = v.get<bool>();
  };
}

inline double or_default(double v, double fallback) { return std::isnan(v) ? fallback : v; }

inline std::filesystem::path output_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("out: cannot create directory " + cfg.out_dir);
  return dir;
}

inline TransferFunction load_plant(const RunConfig& cfg) {
  if (cfg.plant_file.empty()) throw InputError("plant: --plant <file> is required");
  return io::plant_from_json(io::read_file(cfg.plant_file));
}

inline NyquistOptions grid(const RunConfig& cfg) {
  NyquistOptions opt;
  opt.omega_max = cfg.omega_max;
  opt.samples_per_side = cfg.samples;
  return opt;
}

inline void require_sore_bound(const RunConfig& cfg) {
  if (cfg.alpha != kSoreAlpha) throw InputError("alpha: the SG bound S is only available for alpha = 0.9");
}

inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "inf";
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

inline int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
  require_sore_bound(cfg);
  const TransferFunction g = load_plant(cfg);
  const double kp = or_default(cfg.kp, 0.0);
  const double kr = or_default(cfg.kr, 1.0);
  const auto geom = make_plant_geometry(g, grid(cfg));
  const SgBound bound = controller_sg_bound(kp, kr);
  const CertificateReport report = certify(*geom, bound);

  json doc = {{"plant", io::plant_to_json(g)},
              {"controller", {{"kp", kp}, {"kr", kr}, {"alpha", cfg.alpha}}},
              {"certificate", io::report_to_json(report)}};
  if (report.verdict != "inconclusive") doc["tau_sweep"] = tau_sweep_check(*geom, bound, default_taus());
  if (!std::isnan(cfg.gamma_hat)) {
    const Feasibility f = feasibility(*geom, kp, kr, cfg.gamma_hat);
    doc["gamma_hat"] = io::number(cfg.gamma_hat);
    doc["feasible"] = f.feasible;
  }
  const auto dir = output_dir(cfg);
  io::write_file((dir / "report.json").string(), doc);
  io::write_file((dir / "regions.json").string(), io::regions_to_json(report));

  out << "verdict: " << report.verdict << "\n"
      << "n_p: " << report.n_p << "\n"
      << "separation: " << fmt(report.separation) << "\n"
      << "gain bound: " << fmt(report.gain_bound) << "\n";
  if (!report.diagnosis.empty()) out << "diagnosis: " << report.diagnosis << "\n";
  return report.certified ? kOk : kNegative;
}

inline KrDirection parse_direction(const std::string& d) {
  if (d == "negative") return KrDirection::negative;
  if (d == "positive") return KrDirection::positive;
  if (d == "both") return KrDirection::both;
  throw InputError("direction: expected negative, positive or both");
}

inline int cmd_design(const RunConfig& cfg, std::ostream& out) {
  require_sore_bound(cfg);
  const double gamma_hat = or_default(cfg.gamma_hat, 1.0);
  required_separation(gamma_hat);
  const TransferFunction g = load_plant(cfg);
  const auto geom = make_plant_geometry(g, grid(cfg));

  DesignReport rep;
  if (cfg.mode == "min-kp") {
    const double lo = or_default(cfg.kp_min, cfg.signed_search ? -cfg.kp_max : 0.0);
    rep = find_min_kp(*geom, or_default(cfg.kr, -1.0), gamma_hat, lo, cfg.kp_max);
  } else if (cfg.mode == "max-kr") {
    rep = find_max_abs_kr(*geom, or_default(cfg.kp, 0.0), gamma_hat, parse_direction(cfg.direction), cfg.kr_max);
  } else {
    throw InputError("mode: expected min-kp or max-kr");
  }
  const auto dir = output_dir(cfg);
  io::write_file((dir / "report.json").string(), io::design_to_json(rep));
  io::write_file((dir / "regions.json").string(), io::regions_to_json(rep.certificate));

  out << "feasible: " << (rep.feasible ? "yes" : "no") << "\n"
      << "kp: " << fmt(rep.kp) << "\n"
      << "kr: " << fmt(rep.kr) << "\n"
      << "separation: " << fmt(rep.separation) << "\n"
      << "gain bound: " << fmt(rep.gain_bound) << "\n"
      << "evaluations: " << rep.trace.size() << " (" << rep.method << ")\n";
  if (!rep.feasible) {
    for (const auto& p : rep.trace) {
      out << "  kp=" << fmt(p.kp) << " kr=" << fmt(p.kr) << " separation=" << fmt(p.separation) << "\n";
    }
  }
  return rep.feasible ? kOk : kNegative;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const TransferFunction g = load_plant(cfg);
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw InputError("horizon: must be positive");
  if (cfg.variant != "both" && cfg.variant != "reset" && cfg.variant != "lti") {
    throw InputError("variant: expected both, reset or lti");
  }
  LureLoop loop;
  loop.plant = g;
  loop.kp = or_default(cfg.kp, 0.0);
  loop.kr = or_default(cfg.kr, 1.0);
  loop.reset = cfg.reset_system_file.empty() ? make_sore(cfg.alpha)
                                             : io::reset_system_from_json(io::read_file(cfg.reset_system_file));
  loop.reference = Signal::step(cfg.reference_amplitude);
  const auto dir = output_dir(cfg);

  int code = kOk;
  auto run = [&](bool reset, const std::string& name) {
    LureLoop l = loop;
    l.reset_enabled = reset;
    const std::string label = reset ? "reset" : "lti";
    std::ofstream csv(dir / name);
    if (!csv) throw InputError("out: cannot write " + name);
    try {
      const Trajectory t = simulate_closed_loop(l, cfg.horizon);
      io::write_trajectory_csv(csv, t);
      double peak = 0.0;
      for (double y : t.outputs) peak = std::max(peak, std::abs(y));
      out << label << ": bounded, " << t.jumps.size() << " resets, max |y| = " << fmt(peak)
          << ", y(T) = " << fmt(t.outputs.back()) << "\n";
    } catch (const DivergenceError& e) {
      io::write_trajectory_csv(csv, e.partial);
      err << label << ": diverged at t = " << fmt(e.time) << " (" << e.what() << ")\n";
      code = kNegative;
    }
  };
  if (cfg.variant != "lti") run(true, "trajectory.csv");
  if (cfg.variant != "reset") run(false, "trajectory_lti.csv");
  return code;
}

inline int cmd_nyquist(const RunConfig& cfg, std::ostream& out) {
  const TransferFunction g = load_plant(cfg);
  const auto geom = make_plant_geometry(g, grid(cfg));
  const auto dir = output_dir(cfg);
  io::write_file((dir / "nyquist.json").string(), io::nyquist_to_json(*geom));
  out << "n_p: " << geom->esrg.n_p << "\n"
      << "samples: " << geom->esrg.contour.samples.size() << "\n"
      << "omega_max: " << fmt(geom->esrg.contour.omega_max) << "\n";
  return kOk;
}

inline int cmd_serve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.serve_port <= 0 || cfg.serve_port > 65535) throw InputError("serve-port: must lie in 1..65535");
  Service service;
  httplib::Server server;
  service.mount(server);
  out << "listening on http://" << cfg.host << ":" << cfg.serve_port << "\n" << std::flush;
  if (!server.listen(cfg.host, cfg.serve_port)) {
    err << "serve: cannot bind " << cfg.host << ":" << cfg.serve_port << "\n";
    return kInputError;
  }
  return kOk;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using detail::Binding;
  RunConfig cfg;
  CLI::App app{"Scaled-graph stability certificates and gain design for reset control loops", "srgtool"};
  app.require_subcommand(1);
  std::vector<Binding> bindings;

  auto real_opt = [&](CLI::App* sub, const std::string& flag, const std::string& key, double& target,
                      const std::string& help) {
    bindings.push_back({key, sub, sub->add_option(flag, target, help), detail::assign_real(target, key)});
  };
  auto text_opt = [&](CLI::App* sub, const std::string& flag, const std::string& key, std::string& target,
                      const std::string& help) {
    bindings.push_back({key, sub, sub->add_option(flag, target, help), detail::assign_text(target, key)});
  };
  auto int_opt = [&](CLI::App* sub, const std::string& flag, const std::string& key, int& target,
                     const std::string& help) {
    bindings.push_back({key, sub, sub->add_option(flag, target, help), detail::assign_int(target, key)});
  };
  auto common = [&](CLI::App* sub) {
    text_opt(sub, "--plant", "plant", cfg.plant_file, "Plant document {\"num\": [...], \"den\": [...]}");
    text_opt(sub, "--out", "out", cfg.out_dir, "Output directory");
    sub->add_option("--config", cfg.config_file, "JSON config; command-line flags take precedence");
  };
  auto grid_opts = [&](CLI::App* sub) {
    real_opt(sub, "--omega-max", "omega_max", cfg.omega_max, "Nyquist frequency limit (0 = automatic)");
    int_opt(sub, "--samples", "samples", cfg.samples, "Nyquist samples per half contour");
  };
  auto gains = [&](CLI::App* sub, const std::string& kp_help, const std::string& kr_help) {
    real_opt(sub, "--kp", "kp", cfg.kp, kp_help);
    real_opt(sub, "--kr", "kr", cfg.kr, kr_help);
    real_opt(sub, "--alpha", "alpha", cfg.alpha, "SORE parameter (default 0.9)");
  };

  auto* analyze = app.add_subcommand("analyze", "Check the separation certificate for C(kp, kr)");
  common(analyze);
  grid_opts(analyze);
  gains(analyze, "Proportional gain (default 0)", "Reset gain (default 1)");
  real_opt(analyze, "--gamma-hat", "gamma_hat", cfg.gamma_hat, "Also test the target gain bound");

  auto* design = app.add_subcommand("design", "Search gains meeting a target gain bound");
  common(design);
  grid_opts(design);
  gains(design, "Fixed kp for max-kr (default 0)", "Fixed kr for min-kp (default -1)");
  real_opt(design, "--gamma-hat", "gamma_hat", cfg.gamma_hat, "Target L2-gain bound (default 1)");
  text_opt(design, "--mode", "mode", cfg.mode, "min-kp or max-kr");
  text_opt(design, "--direction", "direction", cfg.direction, "kr sign for max-kr: negative, positive, both");
  real_opt(design, "--kp-min", "kp_min", cfg.kp_min, "Lower end of the kp search (default 0)");
  real_opt(design, "--kp-max", "kp_max", cfg.kp_max, "Upper end of the kp search (default 10)");
  real_opt(design, "--kr-max", "kr_max", cfg.kr_max, "Largest |kr| searched (default 10)");
  bindings.push_back({"signed", design, design->add_flag("--signed", cfg.signed_search, "Search negative kp too"),
                      detail::assign_flag(cfg.signed_search, "signed")});

  auto* simulate = app.add_subcommand("simulate", "Closed-loop step response, reset and base-linear");
  common(simulate);
  gains(simulate, "Proportional gain (default 0)", "Reset gain (default 1)");
  real_opt(simulate, "--horizon", "horizon", cfg.horizon, "Simulated time in seconds (default 30)");
  real_opt(simulate, "--reference-amplitude", "reference_amplitude", cfg.reference_amplitude, "Step height");
  text_opt(simulate, "--reset-system", "reset_system", cfg.reset_system_file, "Reset system document");
  text_opt(simulate, "--variant", "variant", cfg.variant, "both, reset or lti");

  auto* nyquist = app.add_subcommand("nyquist", "Export the Nyquist contour and extended SRG");
  common(nyquist);
  grid_opts(nyquist);

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  int_opt(serve, "--serve-port", "serve_port", cfg.serve_port, "Port (default 8080)");
  text_opt(serve, "--host", "host", cfg.host, "Bind address (default 127.0.0.1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  CLI::App* active = app.get_subcommands().front();
  cfg.command = active->get_name();
  try {
    if (!cfg.config_file.empty()) {
      const auto doc = io::read_file(cfg.config_file);
      if (!doc.is_object()) throw InputError(cfg.config_file + ": expected a JSON object");
      for (const auto& b : bindings) {
        if (b.owner != active || b.option->count() > 0) continue;
        if (auto it = doc.find(b.key); it != doc.end()) b.assign(*it);
      }
    }
    if (cfg.command == "analyze") return detail::cmd_analyze(cfg, out);
    if (cfg.command == "design") return detail::cmd_design(cfg, out);
    if (cfg.command == "simulate") return detail::cmd_simulate(cfg, out, err);
    if (cfg.command == "nyquist") return detail::cmd_nyquist(cfg, out);
    return detail::cmd_serve(cfg, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNegative;
  }
}

}  // namespace srg::cli
