#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "lsr/imft_bounds.hpp"
#include "lsr/sampling.hpp"

using namespace lsr;
using testing::code_of;
using testing::vec;

namespace {

// f(x, y) = y - x^2
SplitMap parabola() {
  SplitMap f;
  f.nx = 1;
  f.ny = 1;
  f.eval = [](const Vector& x, const Vector& y) { return Vector(y.array() - x.array().square()); };
  f.jacobians = [](const Vector& x, const Vector&) {
    return PartialJacobians{Matrix::Constant(1, 1, -2 * x(0)), Matrix::Constant(1, 1, 1.0)};
  };
  return f;
}

// f(x, y) = 2y + 3x
SplitMap linear_map() {
  SplitMap f;
  f.nx = 1;
  f.ny = 1;
  f.eval = [](const Vector& x, const Vector& y) { return Vector(2 * y + 3 * x); };
  f.jacobians = [](const Vector&, const Vector&) {
    return PartialJacobians{Matrix::Constant(1, 1, 3.0), Matrix::Constant(1, 1, 2.0)};
  };
  return f;
}

SplitMap singular_map() {
  SplitMap f = linear_map();
  f.jacobians = [](const Vector&, const Vector&) {
    return PartialJacobians{Matrix::Constant(1, 1, 3.0), Matrix::Zero(1, 1)};
  };
  return f;
}

const Vector kZero = Vector::Zero(1);

}  // namespace

TEST_CASE("M values") {
  SUBCASE("parabola at the origin") {
    const auto m = compute_M(parabola(), kZero, kZero, NormKind::Spectral);
    CHECK(m.M_x == 0.0);
    CHECK(m.M_y == 1.0);
  }
  SUBCASE("linear map") {
    const auto m = compute_M(linear_map(), kZero, kZero, NormKind::Spectral);
    CHECK(m.M_x == doctest::Approx(3.0));
    CHECK(m.M_y == doctest::Approx(0.5));
  }
  SUBCASE("parabola at (1, 1), checked against a difference quotient") {
    const auto f = parabola();
    const auto m = compute_M(f, vec({1}), vec({1}), NormKind::Spectral);
    const double h = 1e-6;
    const double fd = (f.eval(vec({1 + h}), vec({1}))(0) - f.eval(vec({1 - h}), vec({1}))(0)) / (2 * h);
    CHECK(m.M_x == doctest::Approx(std::abs(fd)).epsilon(1e-8));
    CHECK(m.M_x == doctest::Approx(2.0));
    CHECK(m.M_y == doctest::Approx(1.0));
  }
  SUBCASE("singular D_y f") {
    CHECK(code_of([] { compute_M(singular_map(), kZero, kZero, NormKind::Spectral); }) == ErrorCode::SingularDyf);
  }
}

TEST_CASE("sampled L for the parabola") {
  const auto f = parabola();
  const auto est = SupremumEstimator::sampled(33);
  for (double r : {0.1, 0.5, 1.0}) {
    const auto l = estimate_L(f, kZero, kZero, r, 0.3, est, NormKind::Spectral);
    // Closed form: sup |2x| over |x| <= r is 2r; boundary points are sampled.
    CHECK(l.L_x == doctest::Approx(2 * r).epsilon(0.02));
    CHECK(l.L_x <= 2 * r * (1 + 1e-15));
    CHECK(l.L_y == 0.0);
  }
}

TEST_CASE("linear maps have zero L") {
  const auto l = estimate_L(linear_map(), kZero, kZero, 5.0, 5.0, SupremumEstimator::sampled(), NormKind::Spectral);
  CHECK(l.L_x == 0.0);
  CHECK(l.L_y == 0.0);
}

TEST_CASE("L at zero radius vanishes") {
  const auto l = estimate_L(parabola(), kZero, kZero, 0.0, 0.0, SupremumEstimator::sampled(), NormKind::Spectral);
  CHECK(l.L_x == 0.0);
  CHECK(l.L_y == 0.0);
}

TEST_CASE("safety factor inflates sampled estimates") {
  const auto l = estimate_L(parabola(), kZero, kZero, 0.5, 0.1, SupremumEstimator::sampled(33, 1.5), NormKind::Spectral);
  CHECK(l.L_x == doctest::Approx(1.5));
}

TEST_CASE("analytic overrides are used verbatim") {
  const auto est = SupremumEstimator::analytic([](double r) { return 2 * r; }, [](double, double) { return 0.0; });
  CHECK(est.rigorous());
  const auto l = estimate_L(parabola(), kZero, kZero, 0.3, 0.1, est, NormKind::Spectral);
  CHECK(l.L_x == 0.6);
  CHECK(l.L_y == 0.0);
}

TEST_CASE("non-finite samples are reported") {
  SplitMap f = parabola();
  f.jacobians = [](const Vector& x, const Vector&) {
    return PartialJacobians{Matrix::Constant(1, 1, std::log(x(0) + 0.1)), Matrix::Constant(1, 1, 1.0)};
  };
  CHECK(code_of([&] { estimate_L(f, kZero, kZero, 0.5, 0.1, SupremumEstimator::sampled(), NormKind::Spectral); }) ==
        ErrorCode::NonFinite);
}

TEST_CASE("check_conditions") {
  SUBCASE("parabola, small radii") {
    const auto v = check_conditions(0.0, 1.0, 0.2, 0.0, 0.1, 0.1);
    CHECK(v.pass);
    CHECK(v.margin_1 == doctest::Approx(0.1 - 0.02));
    CHECK(v.margin_2 == 1.0);
  }
  SUBCASE("parabola, r_x too large") {
    const auto v = check_conditions(0.0, 1.0, 0.6, 0.0, 0.3, 0.1);
    CHECK_FALSE(v.pass);
    CHECK(v.margin_1 < 0);
  }
  SUBCASE("second condition fails on its own") {
    const auto v = check_conditions(0.0, 1.0, 0.0, 1.0, 0.1, 100.0);
    CHECK(v.margin_2 == 0.0);
    CHECK_FALSE(v.pass);
  }
  SUBCASE("zero margin fails") {
    const auto v = check_conditions(1.0, 1.0, 0.0, 0.0, 1.0, 1.0);
    CHECK(v.margin_1 == 0.0);
    CHECK_FALSE(v.pass);
  }
  SUBCASE("radii must be positive") {
    const auto q = make_quantities(parabola(), kZero, kZero, SupremumEstimator::sampled(), NormKind::Spectral);
    CHECK(code_of([&] { check_conditions(q, 0.0, 0.1); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("certified region of the parabola is {2 r_x^2 < r_y}") {
  const auto q = make_quantities(parabola(), kZero, kZero, SupremumEstimator::sampled(33), NormKind::Spectral);
  const std::vector<double> rx = {0.1, 0.2, 0.3};
  const std::vector<double> ry = {0.1, 0.3};
  const auto entries = certify_region(q, rx, ry);
  REQUIRE(entries.size() == 6);
  std::set<std::pair<double, double>> got;
  for (const auto& e : entries)
    if (e.verdict.pass) got.insert({e.r_x, e.r_y});
  std::set<std::pair<double, double>> want;
  for (double a : rx)
    for (double b : ry)
      if (2 * a * a < b) want.insert({a, b});
  CHECK(want.size() == 5);
  CHECK(got == want);
}

TEST_CASE("linear region certifies exactly where M_x r_x < r_y / M_y") {
  const auto q = make_quantities(linear_map(), kZero, kZero, SupremumEstimator::sampled(), NormKind::Spectral);
  const std::vector<double> rx = {0.1, 0.5, 1.0, 2.0};
  const std::vector<double> ry = {0.1, 1.0, 5.0};
  for (const auto& e : certify_region(q, rx, ry)) CHECK(e.verdict.pass == (3 * e.r_x < 2 * e.r_y));
}

TEST_CASE("grids with non-positive radii are rejected") {
  const auto q = make_quantities(parabola(), kZero, kZero, SupremumEstimator::sampled(), NormKind::Spectral);
  CHECK(code_of([&] { certify_region(q, {0.0, 0.1}, {0.1}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { certify_region(q, {0.1}, {}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { certify_region(q, {0.1}, {std::nan("")}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Newton witness inside the certified parabola region") {
  const auto f = parabola();
  const auto q = make_quantities(f, kZero, kZero, SupremumEstimator::sampled(), NormKind::Spectral);
  std::mt19937_64 rng(17);
  for (const auto& e : certify_region(q, {0.1, 0.2, 0.3}, {0.1, 0.3})) {
    if (!e.verdict.pass) continue;
    std::uniform_real_distribution<double> u(-e.r_x, e.r_x);
    for (int k = 0; k < 100; ++k) {
      const Vector x = vec({u(rng)});
      const auto w = newton_witness(f, x, kZero, kZero);
      REQUIRE(w.converged);
      CHECK(std::abs(w.y(0)) < e.r_y);
      CHECK(w.y(0) == doctest::Approx(x(0) * x(0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ball sampling") {
  const Vector c = vec({1.0, -2.0});
  SUBCASE("points stay in the closed ball and include the boundary extremes") {
    for (NormKind nk : {NormKind::Spectral, NormKind::One, NormKind::Infinity}) {
      const auto pts = ball_samples(c, 0.5, 9, nk);
      bool has_axis = false;
      for (const auto& p : pts) {
        CHECK(vector_norm(p - c, nk) <= 0.5 * (1 + 1e-12));
        if ((p - c - vec({0.5, 0})).norm() < 1e-15) has_axis = true;
      }
      CHECK(has_axis);
    }
  }
  SUBCASE("doubling the resolution keeps every earlier point") {
    const auto coarse = ball_samples(c, 0.7, 8, NormKind::Spectral);
    const auto fine = ball_samples(c, 0.7, 16, NormKind::Spectral);
    for (const auto& p : coarse) {
      bool found = false;
      for (const auto& q : fine) found = found || (p - q).norm() == 0.0;
      CHECK(found);
    }
  }
  SUBCASE("zero radius and zero dimension") {
    CHECK(ball_samples(c, 0.0, 33, NormKind::Spectral).size() == 1);
    CHECK(ball_samples(Vector(0), 1.0, 33, NormKind::Spectral).size() == 1);
  }
}

TEST_CASE("parallel_max propagates worker exceptions") {
  CHECK(parallel_max(1000, [](std::size_t i) { return static_cast<double>(i % 97); }, 4) == 96.0);
  CHECK(parallel_max(0, [](std::size_t) { return 1.0; }) == 0.0);
  CHECK(code_of([] {
          parallel_max(100, [](std::size_t i) -> double {
            if (i == 57) fail(ErrorCode::NonFinite, "bad sample");
            return 0.0;
          }, 3);
        }) == ErrorCode::NonFinite);
}
