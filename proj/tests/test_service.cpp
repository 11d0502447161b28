#include <catch_amalgamated.hpp>

#include <chrono>
#include <thread>

#include "srg/service.hpp"

using namespace srg;
using Catch::Approx;
using io::json;

namespace {

const json kUnstable = json::parse(R"({"num": [14, 8], "den": [1, 13, 58, 96, 34, -4]})");

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status;
  }
  return 200;
}

}  // namespace

TEST_CASE("plant session lifecycle", "[service]") {
  Service s;
  const json p = s.handle_plant(kUnstable);
  CHECK(p["n_p"] == 1);
  CHECK(p["poles"].size() == 5);
  CHECK(p["nyquist"].size() <= io::kBoundaryPoints);
  const std::string id = p["session"];
  CHECK(s.session_count() == 1);

  json reload = json::parse(R"({"num": [14, 8], "den": [1, 13, 58, 96, 34, 4.2]})");
  reload["session"] = id;
  CHECK(s.handle_plant(reload)["n_p"] == 0);
  CHECK(s.session_count() == 1);

  reload["session"] = "nope";
  CHECK(status_of([&] { s.handle_plant(reload); }) == 404);
  CHECK(status_of([&] { s.handle_plant(json::parse(R"({"num": [1], "den": [0, 1]})")); }) == 400);
}

TEST_CASE("evaluate matches the certificate", "[service]") {
  Service s;
  const std::string id = s.handle_plant(kUnstable)["session"];
  const json e = s.handle_evaluate({{"session", id}, {"kp", 2.4}, {"kr", -1.0}, {"gamma_hat", 1.0}});
  CHECK(e["separation"].get<double>() == Approx(1.05).margin(1e-4));
  CHECK(e["certified"] == true);
  CHECK(e["feasible"] == true);
  CHECK(e["report"]["verdict"] == "certified");
  CHECK(e["controller_region"].contains("boundary"));

  const json bad = s.handle_evaluate({{"session", id}, {"kp", 1.0}, {"kr", 1.1}});
  CHECK(bad["certified"] == false);
  CHECK(bad["gain_bound"].is_null());

  CHECK(status_of([&] { s.handle_evaluate({{"session", id}, {"kp", "x"}, {"kr", 1.0}}); }) == 400);
  CHECK(status_of([&] { s.handle_evaluate({{"session", id}, {"kr", 1.0}}); }) == 400);
  CHECK(status_of([&] { s.handle_evaluate({{"session", "s999"}, {"kp", 1.0}, {"kr", 1.0}}); }) == 404);
  CHECK(status_of([&] { s.handle_evaluate({{"session", id}, {"kp", 1.0}, {"kr", 1.0}, {"gamma_hat", -1}}); }) ==
        400);
}

TEST_CASE("evaluate latency on a loaded session", "[service]") {
  Service s;
  const std::string id = s.handle_plant(kUnstable)["session"];
  s.handle_evaluate({{"session", id}, {"kp", 2.0}, {"kr", -1.0}});
  double worst = 0.0;
  for (double kp : {1.5, 2.0, 2.35, 3.0, 4.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    s.handle_evaluate({{"session", id}, {"kp", kp}, {"kr", -1.0}});
    worst = std::max(worst, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  CHECK(worst <= 50.0);
}

TEST_CASE("simulate endpoint", "[service]") {
  Service s;
  const std::string id = s.handle_plant(kUnstable)["session"];
  const json r = s.handle_simulate({{"session", id}, {"kp", 2.35}, {"kr", -1.0}, {"horizon", 10.0}});
  CHECK(r["verdict"] == "bounded");
  CHECK(r["variant"] == "reset");
  CHECK(r["trajectory"]["time"].size() <= io::kTrajectoryPoints + r["trajectory"]["jumps"].size() + 1);
  CHECK(status_of([&] { s.handle_simulate({{"session", id}, {"kp", 1}, {"kr", 1}, {"horizon", 500}}); }) == 400);
  CHECK(status_of([&] { s.handle_simulate({{"session", id}, {"kp", 1}, {"kr", 1}, {"horizon", 0}}); }) == 400);
  CHECK(status_of([&] {
          s.handle_simulate({{"session", id}, {"kp", 1}, {"kr", 1}, {"horizon", 5}, {"variant", "x"}});
        }) == 400);

  const std::string unstable = s.handle_plant(json::parse(R"({"num": [1], "den": [1, -1]})"))["session"];
  const json d = s.handle_simulate({{"session", unstable}, {"kp", 0.0}, {"kr", 0.0}, {"horizon", 60.0}});
  CHECK(d["verdict"] == "diverged");
  CHECK(d["diverged_at"].get<double>() < 60.0);
}

TEST_CASE("design endpoint", "[service]") {
  Service s;
  const std::string id = s.handle_plant(kUnstable)["session"];
  const json d = s.handle_design({{"session", id}, {"mode", "min-kp"}, {"kr", -1.0}, {"gamma_hat", 1.0}});
  CHECK(d["kp"].get<double>() == Approx(2.35).margin(2e-3));
  CHECK(d["feasible"] == true);
  CHECK(d.contains("plot_payload"));
  CHECK_FALSE(d["search_trace"].empty());
  const json m = s.handle_design(
      {{"session", id}, {"mode", "max-kr"}, {"kp", 3.0}, {"gamma_hat", 1.0}, {"direction", "negative"}, {"kr_max", 5.0}});
  CHECK(m["feasible"] == true);
  CHECK(status_of([&] { s.handle_design({{"session", id}, {"mode", "x"}, {"gamma_hat", 1.0}}); }) == 400);
}

TEST_CASE("HTTP round trip", "[service]") {
  Service service;
  httplib::Server server;
  service.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto p = client.Post("/plant", kUnstable.dump(), "application/json");
  REQUIRE(p);
  CHECK(p->status == 200);
  const std::string id = json::parse(p->body)["session"];
  auto e = client.Post("/evaluate", json({{"session", id}, {"kp", 2.35}, {"kr", -1.0}}).dump(), "application/json");
  REQUIRE(e);
  CHECK(e->status == 200);
  CHECK(json::parse(e->body)["certified"] == true);
  auto bad = client.Post("/evaluate", "{oops", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body).contains("error"));
  auto h = client.Get("/health");
  REQUIRE(h);
  CHECK(h->status == 200);

  server.stop();
  worker.join();
}
