#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "taylorcert/errors.hpp"
#include "taylorcert/ode_core.hpp"

using namespace taylorcert;

namespace {

OdeProblem make(Field f, double y0, double theta, double t0 = 0.0, double tJ = 1.0, int n = 8) {
  OdeProblem p;
  p.field = std::move(f);
  p.y0 = y0;
  p.theta = theta;
  p.t0 = t0;
  p.tJ = tJ;
  p.smoothness_order = n;
  return p;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Config;
}

}  // namespace

TEST_CASE("field values") {
  CHECK(eval_field(make(Field::zero(), 0.0, 1.0), 3.0, 0.7) == 0.0);
  CHECK(eval_field(make(Field::affine(-1.0, 0.0), 0.0, 1.0), 1.0, 0.0) == -1.0);
  CHECK(eval_field(make(Field::logistic(), 0.5, 0.5), 0.5, 123.0) == 0.25);
  CHECK(eval_field(make(Field::constant(2.5), 0.0, 1.0), -7.0, 1.0) == 2.5);
  const auto dd = make(Field::damped_driven(), 0.0, 1.0);
  CHECK(eval_field(dd, 0.5, 0.3) == doctest::Approx(-0.5 + std::sin(0.3)).epsilon(1e-15));
}

TEST_CASE("derivative stacks") {
  const auto affine = eval_derivatives(make(Field::affine(-1.0, 0.0), 0.0, 5.0), 3.0, 0.0, 2);
  CHECK(affine.coeffs == std::vector<double>{-3.0, -1.0, 0.0});

  const auto square = eval_derivatives(make(Field::riccati(), 0.0, 5.0), 3.0, 0.0, 3);
  CHECK(square.coeffs == std::vector<double>{9.0, 6.0, 2.0, 0.0});

  const auto logistic = eval_derivatives(make(Field::logistic(), 0.0, 1.0), 0.25, 0.0, 2);
  CHECK(logistic.coeffs == std::vector<double>{0.1875, 0.5, -2.0});
  CHECK(logistic.order() == 2);

  const auto sine = eval_derivatives(make(Field::bounded_sine(0.5), 0.0, 4.0), 1.0, 0.0, 4);
  CHECK(sine.coeffs[0] == doctest::Approx(0.5 * std::sin(1.0)));
  CHECK(sine.coeffs[1] == doctest::Approx(0.5 * std::cos(1.0)));
  CHECK(sine.coeffs[2] == doctest::Approx(-0.5 * std::sin(1.0)));
  CHECK(sine.coeffs[3] == doctest::Approx(-0.5 * std::cos(1.0)));
  CHECK(sine.coeffs[4] == doctest::Approx(0.5 * std::sin(1.0)));
}

TEST_CASE("first coefficient equals the field value and polynomial tails vanish") {
  const std::vector<Field> fields{Field::zero(), Field::constant(1.5), Field::affine(2.0, -1.0), Field::logistic(),
                                  Field::riccati(0.7), Field::polynomial({1.0, -2.0, 0.5, 0.25})};
  for (const auto& f : fields) {
    const auto p = make(f, 0.0, 2.0);
    const int d = f.polynomial_degree();
    for (double y : {-1.3, 0.0, 0.4, 1.9}) {
      const auto s = eval_derivatives(p, y, 0.2, 8);
      CHECK(s.coeffs[0] == eval_field(p, y, 0.2));
      for (int k = d + 1; k <= 8; ++k) {
        CHECK(s.coeffs[static_cast<std::size_t>(k)] == 0.0);
      }
    }
  }
}

TEST_CASE("errors") {
  CHECK(kind_of([] { (void)eval_derivatives(make(Field::logistic(), 0.0, 1.0, 0.0, 1.0, 2), 0.0, 0.0, 3); }) ==
        ErrorKind::Order);
  CHECK(kind_of([] { (void)eval_field(make(Field::riccati(), 0.0, 1.0), 1e200, 0.0); }) ==
        ErrorKind::NumericalDomain);
  CHECK(kind_of([] { make(Field::zero(), 0.0, 1.0, 1.0, 1.0).validate(); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { (void)estimate_constants(make(Field::zero(), 0.0, 1.0), 2, 1); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("constant estimation examples") {
  const auto zero = estimate_constants(make(Field::zero(), 0.0, 1.0), 3);
  CHECK(zero.K == 0.0);
  CHECK(zero.K1 == 0.0);
  CHECK(zero.F0 == 0.0);

  const auto affine = estimate_constants(make(Field::affine(-1.0, 0.0), 0.0, 1.0), 2);
  CHECK(affine.F0 == 1.0);
  CHECK(affine.K == 1.0);
  CHECK(affine.K1 == 0.0);

  const auto sine = estimate_constants(make(Field::bounded_sine(0.5), 0.0, M_PI), 1);
  CHECK(sine.F0 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sine.K == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sine.K1 == 0.0);
}

TEST_CASE("estimated constants dominate the sampled chain") {
  const std::vector<OdeProblem> problems{
      make(Field::logistic(), 0.3, 0.25),        make(Field::affine(-1.0, 0.0), 1.0, 0.5),
      make(Field::damped_driven(), 0.5, 0.5),    make(Field::bounded_sine(0.5), 1.0, 0.5),
      make(Field::riccati(), 0.5, 0.3),          make(Field::polynomial({0.0, 0.0, 0.0, 1.0}), 0.0, 1.0),
      make(Field::constant(3.0), 0.0, 1.0),
  };
  for (const auto& p : problems) {
    for (int k_max : {1, 2, 3}) {
      const auto c = estimate_constants(p, k_max);
      const auto& S = c.derivative_sups;
      REQUIRE(S.size() == static_cast<std::size_t>(k_max) + 1);
      CHECK(c.F0 == S[0]);
      if (c.K1 > 0.0) {
        CHECK(c.K < 1.0);
      }
      for (std::size_t j = 1; j < S.size(); ++j) {
        CHECK(S[j] <= c.K * S[j - 1] + c.K1 + 1e-12 * (1.0 + S[j]));
      }
      for (int k = 0; k <= k_max; ++k) {
        CHECK(S[static_cast<std::size_t>(k)] <= c.chained_bound(k) * (1.0 + 1e-12) + 1e-15);
      }
    }
  }
}

TEST_CASE("constants with K1 use the candidate grid") {
  // Degenerate box y = 0 gives S = {0, 0, 1}, so K1 = 0 is infeasible and every K needs K1 = 1.
  const auto c = estimate_constants(make(Field::polynomial({0.0, 0.0, 0.5}), 0.0, 0.0, 0.0, 1.0), 2);
  CHECK(c.K == 0.0);
  CHECK(c.K1 == 1.0);
}

TEST_CASE("refining the grid never lowers a sampled sup") {
  const auto p = make(Field::damped_driven(0.7, 1.3, 2.1), 0.2, 0.9, 0.0, 2.0);
  const auto logistic = make(Field::logistic(), 0.3, 0.6);
  for (const auto& prob : {p, logistic}) {
    for (int d : {3, 11, 51}) {
      const auto coarse = sample_derivative_sups(prob, 3, prob.y_min(), prob.y_max(), prob.t0, prob.tJ, d);
      const auto fine = sample_derivative_sups(prob, 3, prob.y_min(), prob.y_max(), prob.t0, prob.tJ, 2 * d - 1);
      for (std::size_t k = 0; k < coarse.size(); ++k) {
        CHECK(fine[k] >= coarse[k]);
      }
    }
  }
}

TEST_CASE("chained bound and helpers") {
  CHECK(geometric_sum(1.0, 4) == 4.0);
  CHECK(geometric_sum(0.5, 3) == 1.75);
  CHECK(geometric_sum(0.3, 0) == 0.0);
  CHECK(factorial(0) == 1.0);
  CHECK(factorial(5) == 120.0);
  BoundConstants c{0.5, 0.1, 2.0, {}};
  CHECK(c.chained_bound(0) == 2.0);
  CHECK(c.chained_bound(2) == doctest::Approx(0.25 * 2.0 + 0.1 * 1.5).epsilon(1e-15));
}
