#include "doctest.h"
#include "gen.hpp"
#include "skewflow/error.hpp"

using namespace skewflow;

TEST_CASE("space rejects non-positive weights") {
  Vector w(3);
  w << 1.0, 0.0, 2.0;
  CHECK_THROWS_AS(Space{w}, std::invalid_argument);
  CHECK(Space::uniform(4).dim() == 4);
}

TEST_CASE("weighted inner product") {
  Vector w(2), u(2), v(2);
  w << 2.0, 0.5;
  u << 1.0, 2.0;
  v << 3.0, -1.0;
  const Space s(w);
  CHECK(inner(s, u, v) == doctest::Approx(2.0 * 3.0 - 0.5 * 2.0));
  CHECK(norm(s, u) == doctest::Approx(std::sqrt(2.0 + 2.0)));
}

TEST_CASE("orthonormalize drops dependent vectors") {
  const Space s = Space::uniform(3);
  Matrix m(3, 3);
  m << 1, 2, 0,
       0, 0, 1,
       0, 0, 0;
  const SubspaceBasis b = orthonormalize(SubspaceBasis(s, m));
  CHECK(b.size() == 2);
  CHECK(orthonormality_defect(b) < 1e-14);
}

TEST_CASE("property: complement is orthogonal and dimensions add up") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = gen::size(rng, 3, 20);
    const Index k = gen::size(rng, 0, n);
    const Space s(gen::weights(rng, n));
    const Matrix img = gen::normal(rng, n, k);
    const ComplementResult c = complement_with_spectrum(s, img);
    CHECK(c.rank == k);
    CHECK(c.basis.size() == n - k);
    CHECK(orthonormality_defect(c.basis) < 1e-12);
    for (Index i = 0; i < c.basis.size(); ++i)
      for (Index j = 0; j < k; ++j)
        CHECK(std::abs(inner(s, c.basis.vector(i), img.col(j))) < 1e-10 * img.col(j).norm());
  }
}

TEST_CASE("complement orientation is reproducible") {
  std::mt19937_64 rng(5);
  const Index n = 9;
  const Space s(gen::weights(rng, n));
  const Matrix img = gen::normal(rng, n, 6);
  const SubspaceBasis a = complement_basis(s, img);
  const SubspaceBasis b = complement_basis(s, Matrix(img * 2.0));
  CHECK((a.dense() - b.dense()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.weights().dot(a.vector(0)) > 0.0);
}

TEST_CASE("coordinate bases") {
  Vector w(4);
  w << 1, 4, 9, 16;
  const Space s(w);
  const SubspaceBasis c = SubspaceBasis::coordinates(s, {1, 3});
  CHECK(c.size() == 2);
  CHECK_FALSE(c.covers_space());
  const SubspaceBasis o = orthonormalize(c);
  CHECK(orthonormality_defect(o) < 1e-15);
  CHECK(SubspaceBasis::whole(s).covers_space());
  CHECK(span_rank(s, c.dense()) == 2);
}
