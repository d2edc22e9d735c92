#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "traffic/core.hpp"

using namespace traffic;

TEST_CASE("pressure values") {
  const ModelParameters p;
  CHECK(pressure(0.0, p) == 0.0);
  CHECK(pressure(0.5, p) == doctest::Approx(0.693147).epsilon(1e-6));
  const double rho_m = 1.0 - 0.5 * std::exp(-1.0);
  CHECK(pressure(rho_m, p) == doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-14));
  CHECK(pressure(rho_m, p) == doctest::Approx(1.69315).epsilon(1e-5));
  // 0.8161 is rho_m rounded; p' = 1/(1 - rho) amplifies the rounding about fivefold.
  CHECK(std::abs(pressure(0.8161, p) - 1.69315) < 5e-4);
  CHECK_THROWS_AS(pressure(1.0, p), DomainError);
  CHECK_THROWS_AS(pressure(-0.1, p), DomainError);

  ModelParameters fast;
  fast.v_ref = 2.0;
  CHECK(pressure(0.5, fast) == doctest::Approx(2.0 * std::log(2.0)));
}

TEST_CASE("pressure is increasing and its derivatives match finite differences") {
  const ModelParameters p;
  double prev = -1.0;
  for (int i = 0; i < 99; ++i) {
    const double rho = 0.01 * i;
    const double v = pressure(rho, p);
    CHECK(v > prev);
    prev = v;
    if (rho > 0.0) {
      const double h = 1e-6;
      const double fd = (pressure(rho + h, p) - pressure(rho - h, p)) / (2 * h);
      CHECK(pressure_derivative(rho, p) == doctest::Approx(fd).epsilon(1e-7));
      const double fd2 =
          (pressure_derivative(rho + h, p) - pressure_derivative(rho - h, p)) / (2 * h);
      CHECK(pressure_second_derivative(rho, p) == doctest::Approx(fd2).epsilon(1e-6));
    }
  }
}

TEST_CASE("pressure_inverse") {
  const ModelParameters p;
  CHECK(pressure_inverse(0.0, p) == 0.0);
  CHECK(pressure_inverse(0.693147, p) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(pressure_inverse(1e6, p) < 1.0);
  CHECK_THROWS_AS(pressure_inverse(-1e-3, p), DomainError);
  for (int i = 0; i <= 9; ++i) {
    const double rho = 0.1 * i;
    CHECK(std::abs(pressure_inverse(pressure(rho, p), p) - rho) < 1e-12);
  }
}

TEST_CASE("to_primitive examples") {
  const ModelParameters p;
  MacroState s;
  s.dx = 0.1;
  s.rho = {0.5, 0.0};
  s.m = {0.25, 0.0};
  auto prim = to_primitive(s, p);
  CHECK(prim[0].u == doctest::Approx(0.5));
  CHECK(prim[1].u == 0.0);

  s.variable_set = VariableSet::ConservativeY;
  // u = y/rho + ln(1 - rho) = 0.846574/0.5 - 0.693147
  s.m = {0.846574, 0.0};
  prim = to_primitive(s, p);
  CHECK(prim[0].u == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(prim[1].u == 0.0);
}

TEST_CASE("from_primitive and to_primitive round-trip in both variable sets") {
  const ModelParameters p;
  std::vector<Primitive> cells;
  for (int i = 0; i < 50; ++i) cells.push_back({1e-10 + 0.0199 * i, 0.02 * i});
  for (auto set : {VariableSet::Momentum, VariableSet::ConservativeY}) {
    const auto state = from_primitive(0.0, 0.02, cells, set, p);
    const auto back = to_primitive(state, p);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      CHECK(std::abs(back[i].rho - cells[i].rho) < 1e-12);
      CHECK(std::abs(back[i].u - cells[i].u) < 1e-12);
    }
  }
}

TEST_CASE("parameter validation reports a distinct violation per invariant") {
  CHECK_NOTHROW(validate(ModelParameters{}));
  std::vector<ModelParameters> bad(12);
  bad[0].H = 0;
  bad[1].H_B = 0;
  bad[1].H_A = 0;
  bad[2].H_A = 0.5;
  bad[3].v_ref = 0;
  bad[4].w = -1;
  bad[5].q_A = -1;
  bad[6].q_B = -1;
  bad[7].beta = 1.0;
  bad[8].alpha = 1.0;
  bad[9].C_limit = 0;
  bad[10].eta = 3;
  bad[11].c_eta = 0;
  std::set<ParameterViolation> seen;
  for (const auto& p : bad) {
    try {
      validate(p);
      FAIL("expected a ParameterError");
    } catch (const ParameterError& e) {
      seen.insert(e.violation());
    }
  }
  CHECK(seen.size() == bad.size());
}

TEST_CASE("state validation") {
  const ModelParameters p;
  MacroState s;
  s.dx = 0.1;
  s.rho = {0.1, 0.2, 0.3, 0.4, 0.5};
  s.m = {0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK_NOTHROW(validate(s, p));
  s.rho[2] = 1.0;
  CHECK_THROWS(validate(s, p));
  s.rho[2] = 0.3;
  s.m[1] = NAN;
  CHECK_THROWS(validate(s, p));
  s.m.pop_back();
  CHECK_THROWS(validate(s, p));
}

TEST_CASE("model kinds pair with their variable set") {
  CHECK(required_variable_set(ModelKind::ConservativeAwRascle) == VariableSet::ConservativeY);
  for (auto m : {ModelKind::AwRascleType, ModelKind::HamiltonJacobi, ModelKind::Merged})
    CHECK(required_variable_set(m) == VariableSet::Momentum);
  for (auto m : {ModelKind::AwRascleType, ModelKind::HamiltonJacobi, ModelKind::Merged,
                 ModelKind::ConservativeAwRascle})
    CHECK(parse_model_kind(model_name(m)) == m);
  CHECK_THROWS(parse_model_kind("lwr"));
}

TEST_CASE("simulation config validation") {
  SimulationConfig c;
  c.initial_condition = RiemannData{{0.5, 1.0}, {0.5, 0.0}, 0.5};
  c.t_end = 0.1;
  CHECK_NOTHROW(validate(c));
  auto bad = c;
  bad.cfl_number = 0.6;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.n_cells = 9;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  std::get<RiemannData>(bad.initial_condition).x0 = 1.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  std::get<RiemannData>(bad.initial_condition).left.rho = 1.0;
  CHECK_THROWS_WITH_AS(validate(bad), doctest::Contains("rho_l"), ConfigError);
}

TEST_CASE("initial_state places the left state left of x0") {
  SimulationConfig c;
  c.n_cells = 10;
  c.initial_condition = RiemannData{{0.2, 1.0}, {0.6, 0.5}, 0.45};
  const auto s = initial_state(c);
  const auto prim = to_primitive(s, c.params);
  for (std::size_t i = 0; i < prim.size(); ++i) {
    const bool left = s.x(i) < 0.45;
    CHECK(prim[i].rho == doctest::Approx(left ? 0.2 : 0.6));
    CHECK(prim[i].u == doctest::Approx(left ? 1.0 : 0.5));
  }
  CHECK(s.mass() == doctest::Approx(0.4 * 0.2 + 0.6 * 0.6));
}

TEST_CASE("clamp_density keeps a gap below the maximal density") {
  const ModelParameters p;
  CHECK(clamp_density(2.0, p) == doctest::Approx(1.0 - kCeilingGap));
  CHECK(clamp_density(2.0, p) < 1.0);
  CHECK(clamp_density(-1.0, p) == 0.0);
  CHECK(clamp_density(0.3, p) == 0.3);
}
