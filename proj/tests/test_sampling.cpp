#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "equil/estimator.hpp"
#include "equil/explicit_matrix.hpp"
#include "equil/rng.hpp"
#include "test_util.hpp"

using namespace equil;
using testutil::for_each_sign_vector;
using testutil::random_dense;
using testutil::random_sparse;

TEST_CASE("rng streams are deterministic and pinned across platforms") {
  // Frozen reference draws; a change here breaks reproducibility of every
  // seeded experiment in the repository.
  SeededRng a(42, 0);
  CHECK(a.next_u64() == 15474610311340789812ull);
  CHECK(a.next_u64() == 7401741880442573951ull);
  CHECK(a.next_u64() == 13284216013538723942ull);

  SeededRng b(42, 7);
  CHECK(b.next_u64() == 16977106985146821793ull);

  SeededRng c(42, 0);
  CHECK(c.uniform01() == doctest::Approx(0.83888030589611362).epsilon(1e-16));
  CHECK(c.uniform01() == doctest::Approx(0.40124923134763907).epsilon(1e-16));

  SeededRng d(42, 0);
  CHECK(d.normal() == doctest::Approx(-0.48227979325560744).epsilon(1e-15));
  CHECK(d.normal() == doctest::Approx(0.34464574861270958).epsilon(1e-15));
}

TEST_CASE("same seed gives identical sequences, different seed differs") {
  SeededRng a(123, 4), b(123, 4), c(124, 4);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto x = a.next_u64();
    all_equal = all_equal && (x == b.next_u64());
    any_diff = any_diff || (x != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform01 stays inside the open unit interval") {
  SeededRng rng(5, 5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_index covers its range") {
  SeededRng rng(6, 6);
  bool seen[5] = {false, false, false, false, false};
  for (int i = 0; i < 1000; ++i) {
    const auto k = rng.uniform_index(5);
    REQUIRE(k < 5);
    seen[k] = true;
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("rademacher entries are signs, reproducible under the seed") {
  SeededRng rng(7, 0);
  const Vec one = rademacher(1, rng);
  CHECK((one[0] == 1.0 || one[0] == -1.0));

  SeededRng r1(8, 3), r2(8, 3);
  const Vec s1 = rademacher(32, r1);
  const Vec s2 = rademacher(32, r2);
  CHECK(s1 == s2);
  for (Index i = 0; i < s1.size(); ++i) {
    CHECK((s1[i] == 1.0 || s1[i] == -1.0));
  }
}

TEST_CASE("rademacher coordinates are mean-zero (Monte Carlo)") {
  SeededRng rng(9, 0);
  const int draws = 100000;
  Vec sum = Vec::Zero(4);
  for (int k = 0; k < draws; ++k) sum += rademacher(4, rng);
  // 3.5 sigma bound on a binomial mean.
  const double bound = 3.5 / std::sqrt(static_cast<double>(draws));
  for (Index i = 0; i < 4; ++i) {
    CHECK(std::abs(sum[i] / draws) <= bound);
  }
}

TEST_CASE("estimator on the identity is exact for every draw") {
  const ExplicitMatrix I = ExplicitMatrix::identity(6);
  SeededRng rng(10, 0);
  for (int k = 0; k < 20; ++k) {
    CHECK(estimate_row_norms_sq(I, rng) == Vec::Ones(6));
  }
}

TEST_CASE("estimator equals |Bs|^2 for the probe it draws") {
  SeededRng rng(11, 0);
  const ExplicitMatrix B = ExplicitMatrix::dense(random_dense(5, 7, rng));
  SeededRng probe_a(77, 2), probe_b(77, 2);
  const Vec z = estimate_row_norms_sq(B, probe_a);
  const Vec s = rademacher(7, probe_b);
  const Vec want = B.apply(s).cwiseAbs2();
  CHECK(z == want);
}

TEST_CASE("single row (3,4): values and exhaustive mean") {
  Mat row(1, 2);
  row << 3, 4;
  const ExplicitMatrix B = ExplicitMatrix::dense(row);

  double sum = 0.0;
  for_each_sign_vector(2, [&](const Vec& s) {
    const double z = B.apply(s).cwiseAbs2()[0];
    CHECK((z == doctest::Approx(1.0) || z == doctest::Approx(49.0)));
    sum += z;
  });
  CHECK(sum / 4.0 == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("zero row estimates exactly zero") {
  Mat A(2, 3);
  A.setZero();
  A(0, 0) = 2.0;
  const ExplicitMatrix B = ExplicitMatrix::dense(A);
  SeededRng rng(12, 0);
  for (int k = 0; k < 10; ++k) {
    const Vec z = estimate_row_norms_sq(B, rng);
    CHECK(z[1] == 0.0);
  }
}

TEST_CASE("exhaustive unbiasedness on random matrices") {
  SeededRng rng(13, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = 1 + static_cast<Index>(rng.uniform_index(6));
    const Index n = 2 + static_cast<Index>(rng.uniform_index(9));  // <= 10
    const ExplicitMatrix B =
        trial % 2 == 0 ? ExplicitMatrix::dense(random_dense(m, n, rng))
                       : random_sparse(m, n, 0.5, rng);
    Vec mean = Vec::Zero(m);
    for_each_sign_vector(n, [&](const Vec& s) { mean += B.apply(s).cwiseAbs2(); });
    mean /= std::pow(2.0, static_cast<double>(n));
    const Vec exact = row_norms_sq_exact(B);
    CHECK((mean - exact).norm() <= 1e-12 * std::max(exact.norm(), 1e-30));
  }
}

TEST_CASE("rademacher estimator variance: closed form and normal comparison") {
  SeededRng rng(14, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.uniform_index(7));
    Vec b(n);
    for (Index i = 0; i < n; ++i) b[i] = rng.normal();
    const double s2 = b.squaredNorm();
    const double s4 = b.array().pow(4).sum();
    const double want_var = 2.0 * (s2 * s2 - s4);

    // Exhaustive second moment of (b^T s)^2 over sign vectors.
    double m1 = 0.0, m2 = 0.0;
    for_each_sign_vector(n, [&](const Vec& s) {
      const double z = b.dot(s) * b.dot(s);
      m1 += z;
      m2 += z * z;
    });
    const double count = std::pow(2.0, static_cast<double>(n));
    m1 /= count;
    m2 /= count;
    CHECK(m1 == doctest::Approx(s2).epsilon(1e-12));
    CHECK(m2 - m1 * m1 == doctest::Approx(want_var).epsilon(1e-10));

    // Rademacher probes dominate unit-normal probes, whose variance is
    // 2 (sum b^2)^2; equality only when one coordinate carries everything.
    const double normal_var = 2.0 * s2 * s2;
    CHECK(want_var <= normal_var + 1e-12);
  }
}

TEST_CASE("normal-probe variance formula verified by Monte Carlo") {
  SeededRng rng(15, 0);
  Vec b(3);
  b << 1.0, -2.0, 0.5;
  const double s2 = b.squaredNorm();
  const double want_var = 2.0 * s2 * s2;  // Var (b^T g)^2, g standard normal

  const int draws = 200000;
  double m1 = 0.0, m2 = 0.0;
  for (int k = 0; k < draws; ++k) {
    Vec g(3);
    for (Index i = 0; i < 3; ++i) g[i] = rng.normal();
    const double z = b.dot(g) * b.dot(g);
    m1 += z;
    m2 += z * z;
  }
  m1 /= draws;
  m2 /= draws;
  const double got_var = m2 - m1 * m1;
  // Fourth-moment Monte Carlo at 2e5 samples: a few percent of accuracy.
  CHECK(got_var == doctest::Approx(want_var).epsilon(0.08));
}
