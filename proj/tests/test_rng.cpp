#include <doctest.h>

#include <vector>

#include "isovar/rng.hpp"
#include "support.hpp"

using namespace isovar;

TEST_CASE("streams are reproducible and distinct") {
  Rng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  std::vector<std::uint64_t> xa, xb, xc, xd;
  for (int i = 0; i < 100; ++i) {
    xa.push_back(a());
    xb.push_back(b());
    xc.push_back(c());
    xd.push_back(d());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  CHECK(xa != xd);
}

TEST_CASE("substreams do not depend on the parent position") {
  Rng a(5);
  const Rng s1 = a.substream(3);
  for (int i = 0; i < 10; ++i) a();
  Rng s2 = a.substream(3);
  Rng s1c = s1;
  CHECK(s1c() == s2());
}

TEST_CASE("uniforms and normals") {
  Rng rng(9);
  std::vector<double> u(100000), n(100000), e(100000);
  for (auto& x : u) {
    x = rng.uniform_open();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
  }
  for (auto& x : n) x = rng.normal();
  for (auto& x : e) x = rng.exponential();
  CHECK(testing::moments(u).mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(testing::moments(n).var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(testing::moments(e).mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("derived seeds") {
  static_assert(derive_seed(1, 1) != derive_seed(1, 2));
  CHECK(derive_seed(1, 1) == derive_seed(1, 1));
  CHECK(derive_seed(1, 1) != derive_seed(2, 1));
}
