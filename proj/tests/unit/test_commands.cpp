#include <string>

#include "doctest.h"
#include "heatlocus/commands.hpp"

using namespace heatlocus;
using nlohmann::json;

TEST_CASE("exit statuses follow the error class") {
  CHECK(exit_status(ErrorKind::InvalidInput) == 2);
  CHECK(exit_status(ErrorKind::Parse) == 2);
  CHECK(exit_status(ErrorKind::Catalog) == 2);
  CHECK(exit_status(ErrorKind::ContinuumFamily) == 4);
  CHECK(exit_status(ErrorKind::Quadrature) == 3);
  CHECK(exit_status(ErrorKind::IntegrationFailure) == 3);
}

TEST_CASE("unknown command is invalid input") {
  try {
    run_command("bogus", json::object());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(exit_status(e.kind()) == 2);
  }
}

TEST_CASE("wrongly typed config fields are invalid input") {
  const json config = json::parse(R"({"structure": {"name": "euclidean", "params": {"n": 2}}, "geodesic": {"q0": [0, 0], "lambda": "x", "T": 1}})");
  try {
    run_command("geodesic", config);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(exit_status(e.kind()) == 2);
  }
}

TEST_CASE("geodesic on the Heisenberg group reports the cut time 2 pi") {
  const json config = json::parse(
      R"({"structure": {"name": "heisenberg"}, "geodesic": {"q0": [0, 0, 0], "lambda": [1, 0, 1], "T": 8}})");
  const CommandOutput out = run_command("geodesic", config);
  CHECK(out.format == "csv");
  CHECK(out.primary.rfind("t,chart,q1,q2,q3,p1,p2,p3,H\n", 0) == 0);
  REQUIRE(out.sidecar);
  CHECK(out.data["t_conj"].get<double>() == doctest::Approx(2.0 * M_PI).epsilon(1e-6));
  CHECK(out.data["t_cut"].get<double>() == doctest::Approx(2.0 * M_PI).epsilon(1e-4));
}

TEST_CASE("classify fixture gives an A5 point") {
  const CommandOutput out = run_command("classify", json::parse(R"({"structure": {"fixture": {"eta": 3}}})"));
  CHECK(out.status == kExitOk);
  CHECK(out.data.dump().find("\"m\":5") != std::string::npos);
}

TEST_CASE("classify refuses a continuum of minimizers") {
  const json config = json::parse(R"({"structure": {"name": "heisenberg"}, "classify": {"q1": [0, 0, 0], "q2": [0, 0, 1]}})");
  const CommandOutput out = run_command("classify", config);
  CHECK(out.status == kExitContinuum);
}

TEST_CASE("predict from explicit classifications") {
  const json config = json::parse(R"({"predict": {"n": 3, "classifications": [{"m": 3}], "constants": false}})");
  const CommandOutput out = run_command("predict", config);
  CHECK(out.status == kExitOk);
  CHECK(out.data["exponent"] == "7/4");
  CHECK(out.data["remainder"] == "1/2");
  CHECK(out.data["leading_C"].is_null());
  RunOptions verify;
  verify.verify = true;
  const CommandOutput checked = run_command("predict", config, verify);
  CHECK(checked.status == kExitOk);
  CHECK(checked.data["fit"]["slope"].get<double>() == doctest::Approx(-1.75).epsilon(0.01));
}

TEST_CASE("laplace-check agrees with the two-term expansion") {
  const json config = json::parse(R"({"laplace_check": {"m_list": [1, 2], "f": "1 + x2^2", "box": 1}})");
  const CommandOutput out = run_command("laplace-check", config);
  CHECK(out.format == "csv");
  CHECK(out.data["power"] == "3/4");
  CHECK(out.data["residual_ok"] == true);
  CHECK(out.data["c0_relative_error"].get<double>() < 1e-6);
}

TEST_CASE("repeated runs produce identical output") {
  const json config = json::parse(R"({"structure": {"name": "euclidean", "params": {"n": 2}}, "distance": {"q1": [0, 0], "q2": [1, 1]}})");
  CHECK(run_command("distance", config).primary == run_command("distance", config).primary);
}
