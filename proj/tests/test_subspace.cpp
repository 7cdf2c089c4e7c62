#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "lsr/errors.hpp"
#include "lsr/subspace.hpp"

using namespace lsr;

using testing::code_of;
using testing::mat2;

TEST_CASE("tanh Jacobian at lambda = 1 splits into symmetric and antisymmetric lines") {
  const auto d = compute_decomposition(mat2(-1, 1, 1, -1), 1e-9);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(d.q == 1);
  CHECK(d.rank() == 1);
  CHECK(d.singular_values(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(d.singular_values(1)) < 1e-14);
  // Kernel spanned by (1,1)/sqrt2, range by (-1,1)/sqrt2 up to sign.
  CHECK(std::abs(std::abs(d.V(0, 0)) - s) < 1e-14);
  CHECK(std::abs(d.V(0, 0) - d.V(1, 0)) < 1e-14);
  CHECK(std::abs(std::abs(d.W(0, 0)) - s) < 1e-14);
  CHECK(std::abs(d.W(0, 0) + d.W(1, 0)) < 1e-14);
  CHECK((d.J * d.V).norm() < 1e-14);
  CHECK((d.Wperp.transpose() * d.J).norm() < 1e-14);
}

TEST_CASE("zero Jacobian has a full kernel and an empty range basis") {
  const auto d = compute_decomposition(Matrix::Zero(2, 2));
  CHECK(d.q == 2);
  CHECK(d.W.cols() == 0);
  CHECK(d.Vperp.cols() == 0);
  CHECK(d.W.rows() == 2);
  CHECK((d.V.transpose() * d.V - Matrix::Identity(2, 2)).norm() < 1e-14);
  CHECK(projection_onto_range(d).isZero(0.0));
}

TEST_CASE("regular Jacobian is rejected") {
  CHECK(code_of([] { compute_decomposition(mat2(2, 0, 0, 3)); }) == ErrorCode::NonSingularJacobian);
}

TEST_CASE("malformed Jacobians") {
  CHECK(code_of([] { compute_decomposition(Matrix::Zero(2, 3)); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { compute_decomposition(Matrix(0, 0)); }) == ErrorCode::DimensionMismatch);
  Matrix bad = mat2(1, 1, 1, 1);
  bad(0, 1) = std::nan("");
  CHECK(code_of([&] { compute_decomposition(bad); }) == ErrorCode::NonFinite);
}

TEST_CASE("projection onto the range of the tanh Jacobian") {
  const auto d = compute_decomposition(mat2(-1, 1, 1, -1));
  const Matrix P = projection_onto_range(d);
  CHECK((P - 0.5 * mat2(1, -1, -1, 1)).norm() < 1e-14);
}

TEST_CASE("projection for a rank-2 product of random factors") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Matrix A(4, 2), B(2, 4);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = nd(rng);
  for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = nd(rng);
  const Matrix J = A * B;
  const auto d = compute_decomposition(J);
  CHECK(d.q == 2);
  const Matrix P = projection_onto_range(d);
  CHECK((P * P - P).norm() < 1e-12);
  CHECK((P - P.transpose()).norm() < 1e-12);
  CHECK((P * J - J).norm() < 1e-10);
}

TEST_CASE("split_state on the tanh decomposition") {
  const auto d = compute_decomposition(mat2(-1, 1, 1, -1));
  const double s = 1.0 / std::sqrt(2.0);

  SUBCASE("points on the kernel line have no range component") {
    const double gamma = 0.731;
    const auto st = split_state(d, Vector::Constant(2, gamma * s));
    CHECK(st.alpha(0) == doctest::Approx(gamma).epsilon(1e-14));
    CHECK(std::abs(st.beta(0)) < 1e-15);
  }
  SUBCASE("origin") {
    const auto st = split_state(d, Vector::Zero(2));
    CHECK(st.alpha.isZero(0.0));
    CHECK(st.beta.isZero(0.0));
  }
  SUBCASE("unit vector") {
    Vector x(2);
    x << 1, 0;
    const auto st = split_state(d, x);
    CHECK(std::abs(std::abs(st.alpha(0)) - s) < 1e-15);
    CHECK(std::abs(std::abs(st.beta(0)) - s) < 1e-15);
    CHECK((join_state(d, st.alpha, st.beta) - x).norm() < 1e-15);
  }
  SUBCASE("wrong length") {
    CHECK(code_of([&] { split_state(d, Vector::Zero(3)); }) == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("round trip on random points") {
  const auto d = compute_decomposition(mat2(-1, 1, 1, -1));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 1000; ++k) {
    Vector x(2);
    x << u(rng), u(rng);
    const auto st = split_state(d, x);
    CHECK((join_state(d, st.alpha, st.beta) - x).norm() < 1e-12);
  }
}

TEST_CASE("bases are sign-normalised and reproducible") {
  const Matrix J = mat2(1, -1, -1, 1);
  const auto a = compute_decomposition(J);
  const auto b = compute_decomposition(J);
  CHECK(a.V == b.V);
  CHECK(a.W == b.W);
  CHECK(a.Vperp == b.Vperp);
  CHECK(a.Wperp == b.Wperp);
  for (const Matrix* m : {&a.V, &a.Vperp, &a.W, &a.Wperp}) {
    for (Eigen::Index c = 0; c < m->cols(); ++c) {
      const double big = m->col(c).cwiseAbs().maxCoeff();
      Eigen::Index lead = 0;
      while (std::abs((*m)(lead, c)) < big * (1 - 1e-12)) ++lead;
      CHECK((*m)(lead, c) > 0);
    }
  }
}
