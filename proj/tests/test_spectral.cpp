#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "kirchhoff/rng.hpp"
#include "kirchhoff/spectral.hpp"

using namespace kirchhoff;

namespace {

SpectralState two_mode_state() {
  SpectralState st;
  st.modes = {ModeIndex(1), ModeIndex(2)};
  st.c = {1.0, 0.5};
  st.v = {0.3, -0.2};
  return st;
}

// Hand-rolled state generator for property tests (not the committed data RNG).
SpectralState random_test_state(std::uint64_t seed, int n_modes) {
  SplitMix64 rng(seed);
  SpectralState st;
  for (int k = 1; k <= n_modes; ++k) {
    st.modes.push_back(ModeIndex(k));
    st.c.push_back(rng.symmetric() / (k * k));
    st.v.push_back(rng.symmetric() / (k * k));
  }
  return st;
}

}  // namespace

TEST_CASE("mode eigenvalues") {
  CHECK(ModeIndex(3).lambda == 9.0);
  CHECK(ModeIndex(3, 4).lambda == 25.0);
  CHECK(ModeIndex(1, 1).dim == 2);
  CHECK_THROWS_AS(ModeIndex(0), std::invalid_argument);
  CHECK_THROWS_AS(ModeIndex(1, -2), std::invalid_argument);
}

TEST_CASE("observables: single-mode closed forms") {
  SpectralState st;
  st.modes = {ModeIndex(1)};
  st.c = {1.0};
  st.v = {0.0};
  const auto nl = Nonlinearity::constant(1.0);
  const auto smp = observables(st, nl);
  CHECK(smp.s == 1.0);
  CHECK(smp.s_prime == 0.0);
  CHECK(smp.s_second == -2.0);
  CHECK(smp.E == 1.0);
  CHECK(smp.F == 1.0);
  CHECK(smp.H1 == 1.0);
  CHECK(!smp.I.has_value());

  st.v = {1.0};
  CHECK(observables(st, nl).s_prime == 2.0);
}

TEST_CASE("observables: two-mode affine sample against scalar evaluation") {
  const auto st = two_mode_state();
  const auto nl = Nonlinearity::affine_plus(1.0);
  const auto smp = observables(st, nl);

  // Independent scalar evaluation of the mode sums.
  const double lam[] = {1.0, 4.0};
  const double s = lam[0] * 1.0 + lam[1] * 0.25;
  const double sp = 2.0 * (lam[0] * 1.0 * 0.3 + lam[1] * 0.5 * -0.2);
  const double slv = lam[0] * 0.09 + lam[1] * 0.04;
  const double sl2c = 1.0 * 1.0 + 16.0 * 0.25;
  const double m = 1.0 + s;
  const double ssec = 2.0 * slv - 2.0 * m * sl2c;
  const double E = slv / std::sqrt(m) + std::sqrt(m) * sl2c;
  const double g1 = -1.0 / (2.0 * m * std::sqrt(m));
  const double F = E - 0.25 * g1 * sp * sp;
  const double H1 = (0.09 + 0.04) + (s + 0.5 * s * s);

  CHECK(smp.s == doctest::Approx(s).epsilon(1e-14));
  CHECK(smp.s_prime == doctest::Approx(sp).epsilon(1e-14));
  CHECK(smp.s_second == doctest::Approx(ssec).epsilon(1e-14));
  CHECK(smp.E == doctest::Approx(E).epsilon(1e-14));
  CHECK(smp.F == doctest::Approx(F).epsilon(1e-14));
  CHECK(smp.H1 == doctest::Approx(H1).epsilon(1e-14));
}

TEST_CASE("observables: pokhozhaev functional") {
  const auto st = two_mode_state();
  const auto nl = Nonlinearity::pokhozhaev(1, 1);
  const auto smp = observables(st, nl);
  REQUIRE(smp.I.has_value());
  const double s = 2.0, q = s + 1.0;
  const double slv = 0.09 + 4 * 0.04;
  const double sl2c = 1.0 + 16 * 0.25;
  const double slcv = 0.3 + 4 * 0.5 * -0.2;
  CHECK(*smp.I ==
        doctest::Approx(q * slv + sl2c / q - 1.0 * slcv * slcv).epsilon(1e-14));
}

TEST_CASE("rhs: fixed points and scaling") {
  SpectralState st;
  st.modes = {ModeIndex(1)};
  st.c = {1.0};
  st.v = {0.0};
  std::vector<double> dc, dv;
  rhs(st, Nonlinearity::constant(1.0), dc, dv);
  CHECK(dc[0] == 0.0);
  CHECK(dv[0] == -1.0);

  rhs(st, Nonlinearity::pokhozhaev(1, 1), dc, dv);
  CHECK(dv[0] == doctest::Approx(-0.25).epsilon(1e-15));  // m(1) = 1/4

  st.c = {0.0};
  st.v = {0.7};
  rhs(st, Nonlinearity::affine_plus(1.0), dc, dv);
  CHECK(dc[0] == 0.7);
  CHECK(dv[0] == 0.0);  // zero fixed point of the c-equation
}

TEST_CASE("galerkin closure: s' through the rhs is the observable s'") {
  const auto nl = Nonlinearity::affine_plus(1.0);
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    const auto st = random_test_state(seed, 8);
    std::vector<double> dc, dv;
    rhs(st, nl, dc, dv);
    double chain = 0;  // d/dt sum lambda c^2 = sum 2 lambda c dc
    for (std::size_t i = 0; i < st.size(); ++i)
      chain += 2.0 * st.modes[i].lambda * st.c[i] * dc[i];
    const auto smp = observables(st, nl);
    CHECK(std::abs(chain - smp.s_prime) <=
          1e-14 * std::max(1.0, std::abs(smp.s_prime)));
  }
}

TEST_CASE("cauchy-schwarz chain and sandwich precondition") {
  const auto nl = Nonlinearity::affine_plus(1.0);
  for (std::uint64_t seed = 10; seed < 40; ++seed) {
    const auto st = random_test_state(seed, 6);
    const auto smp = observables(st, nl);
    double slv = 0;
    for (std::size_t i = 0; i < st.size(); ++i)
      slv += st.modes[i].lambda * st.v[i] * st.v[i];
    const double m = nl.eval(smp.s).m;
    const double slack = 1e-13 * std::max(1.0, smp.s_prime * smp.s_prime);
    CHECK(smp.s_prime * smp.s_prime <= 4.0 * smp.s * slv + slack);
    CHECK(4.0 * smp.s * slv <=
          4.0 * smp.s * std::sqrt(m) * smp.E * (1 + 1e-13) + slack);

    const double corr = std::abs(smp.F - smp.E);
    if (corr <= 0.5 * smp.E) {
      CHECK(smp.F >= 0.5 * smp.E * (1 - 1e-13));
      CHECK(smp.F <= 1.5 * smp.E * (1 + 1e-13));
    }
  }
}

TEST_CASE("make_initial_state: explicit data") {
  InitialDataSpec spec;
  spec.explicit_modes = {{ModeIndex(1), 1.0, 0.0}};
  spec.epsilon = 0.5;
  const auto st = make_initial_state(spec);
  CHECK(st.t == 0.0);
  CHECK(st.c == std::vector<double>{0.5});
  CHECK(st.v == std::vector<double>{0.0});

  spec.epsilon = 0.0;
  const auto zero = make_initial_state(spec);
  CHECK(zero.c[0] == 0.0);
  std::vector<double> dc, dv;
  rhs(zero, Nonlinearity::affine_plus(1.0), dc, dv);
  CHECK(dc[0] == 0.0);
  CHECK(dv[0] == 0.0);
}

TEST_CASE("make_initial_state: committed random profile") {
  InitialDataSpec spec;
  spec.random = RandomProfile{42, 16, 2.0, 1};
  spec.epsilon = 0.1;
  const auto st = make_initial_state(spec);
  REQUIRE(st.size() == 16);
  const auto smp = observables(st, Nonlinearity::constant(1.0));
  // Regression constant for the committed SplitMix64 stream (seed 42, N = 16,
  // p = 2, eps = 0.1). If this moves, the data format contract moved.
  CHECK(smp.s == doctest::Approx(0.0023774344569936572).epsilon(1e-13));

  // Determinism and epsilon-linearity.
  const auto st2 = make_initial_state(spec);
  CHECK(st.c == st2.c);
  CHECK(st.v == st2.v);
  spec.epsilon = 0.2;
  const auto st3 = make_initial_state(spec);
  for (std::size_t i = 0; i < st.size(); ++i)
    CHECK(st3.c[i] == doctest::Approx(2.0 * st.c[i]).epsilon(1e-15));
}

TEST_CASE("make_initial_state: 2-d box profile") {
  InitialDataSpec spec;
  spec.random = RandomProfile{7, 3, 2.0, 2};
  spec.epsilon = 1.0;
  const auto st = make_initial_state(spec);
  REQUIRE(st.size() == 9);
  CHECK(st.modes.front().lambda == 2.0);  // (1,1)
  CHECK(st.modes.back().lambda == 18.0);  // (3,3)
  double s = 0;
  for (std::size_t i = 0; i < st.size(); ++i)
    s += st.modes[i].lambda * st.c[i] * st.c[i];
  CHECK(observables(st, Nonlinearity::constant(1.0)).s == doctest::Approx(s));
}

TEST_CASE("make_initial_state: validation") {
  InitialDataSpec spec;
  CHECK_THROWS_AS(make_initial_state(spec), ConfigError);  // empty

  spec.random = RandomProfile{1, 8, 1.1, 1};  // decay below H^2 threshold
  CHECK_THROWS_AS(make_initial_state(spec), ConfigError);

  InitialDataSpec bad;
  bad.explicit_modes = {{ModeIndex(1), std::nan(""), 0.0}};
  CHECK_THROWS_AS(make_initial_state(bad), ConfigError);

  InitialDataSpec neg;
  neg.explicit_modes = {{ModeIndex(1), 1.0, 0.0}};
  neg.epsilon = -0.5;
  CHECK_THROWS_AS(make_initial_state(neg), ConfigError);
}
