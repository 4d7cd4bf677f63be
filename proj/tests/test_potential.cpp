#include <doctest.h>

#include <numeric>

#include "interlace/potential.hpp"
#include "support.hpp"

using namespace interlace;
using namespace testing_support;

namespace {
const GreenFunction& g3() {
  static const GreenFunction g(3);
  return g;
}

std::vector<Point> box(int a, int b, int c) {
  std::vector<Point> K;
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j)
      for (int k = 0; k < c; ++k) K.push_back(Point{i, j, k});
  return K;
}
}  // namespace

TEST_CASE("single point and pair") {
  const double g0 = g3().at_origin();
  const std::vector<Point> one{Point{0, 0, 0}};
  const auto p1 = equilibrium_measure(g3(), one);
  CHECK(p1.capacity == doctest::Approx(1 / g0).epsilon(1e-12));
  CHECK(p1.capacity == doctest::Approx(0.65946).epsilon(1e-5));

  const std::vector<Point> pair{Point{0, 0, 0}, Point{1, 0, 0}};
  const auto p2 = equilibrium_measure(g3(), pair);
  CHECK(p2.capacity == doctest::Approx(2 / (2 * g0 - 1)).epsilon(1e-12));
  CHECK(p2.normalized[0] == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<Point> spread{Point{0, 0, 0}, Point{3, 0, 0}};
  const auto p3 = equilibrium_measure(g3(), spread);
  CHECK(p3.capacity == doctest::Approx(2 / (g0 + g3()(Point{3, 0, 0}))).epsilon(1e-12));
}

TEST_CASE("interior points carry no mass and corners beat face centres") {
  const auto K = box(5, 5, 5);
  const auto p = equilibrium_measure(g3(), K);
  const auto weight = [&](const Point& x) {
    return p.weights[std::find(p.points.begin(), p.points.end(), x) - p.points.begin()];
  };
  CHECK(weight(Point{2, 2, 2}) == 0.0);
  CHECK(weight(Point{0, 0, 0}) > weight(Point{2, 2, 0}));
  CHECK(p.residual < 1e-10);
  CHECK(std::accumulate(p.normalized.begin(), p.normalized.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (double w : p.weights) {
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("property: capacity is monotone and subadditive") {
  Rng rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<Point> A, B;
    const int na = rand_int(rng, 1, 8), nb = rand_int(rng, 1, 8);
    for (int i = 0; i < na; ++i) A.push_back(rand_point(rng, 3, -3, 3));
    for (int i = 0; i < nb; ++i) B.push_back(rand_point(rng, 3, -3, 3));
    std::vector<Point> AB = A;
    AB.insert(AB.end(), B.begin(), B.end());
    const double ca = equilibrium_measure(g3(), A).capacity;
    const double cb = equilibrium_measure(g3(), B).capacity;
    const double cab = equilibrium_measure(g3(), AB).capacity;
    CHECK(cab >= ca - 1e-12);
    CHECK(cab >= cb - 1e-12);
    CHECK(cab <= ca + cb + 1e-12);
  }
}

TEST_CASE("property: weights respect the symmetries of K") {
  const auto K = box(3, 2, 4);
  const auto p = equilibrium_measure(g3(), K);
  for (std::size_t i = 0; i < K.size(); ++i) {
    const Point& x = p.points[i];
    const Point mirrored{2 - x[0], 1 - x[1], 3 - x[2]};
    const auto j = std::find(p.points.begin(), p.points.end(), mirrored) - p.points.begin();
    CHECK(p.weights[i] == doctest::Approx(p.weights[j]).epsilon(1e-10));
  }
}

TEST_CASE("hitting probabilities") {
  const std::vector<Point> origin{Point{0, 0, 0}};
  CHECK(hitting_probability(g3(), Point{0, 0, 0}, origin) == 1.0);
  CHECK(hitting_probability(g3(), Point{1, 0, 0}, origin) == doctest::Approx(0.34054).epsilon(1e-4));
  double prev = 1.0;
  for (int n = 1; n <= 30; ++n) {
    const double h = hitting_probability(g3(), Point{n, 0, 0}, origin);
    CHECK(h < prev);
    CHECK(h == doctest::Approx(g3()(Point{n, 0, 0}) / g3().at_origin()).epsilon(1e-12));
    prev = h;
  }
}

TEST_CASE("property: hitting probability is harmonic off K") {
  const auto K = box(2, 2, 2);
  const EquilibriumSystem sys(g3(), K);
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    Point x = rand_point(rng, 3, -6, 7);
    bool near = false;
    for (const Point& k : K) near = near || (x - k).norm1() <= 1;
    if (near) continue;
    double avg = 0;
    for (const Point& y : neighbors(x)) avg += sys.hitting_probability(y) / 6;
    CHECK(std::abs(sys.hitting_probability(x) - avg) < 1e-10);
  }
}

TEST_CASE("harmonic measure sums to the hitting probability") {
  const auto K = box(2, 2, 2);
  const EquilibriumSystem sys(g3(), K);
  for (const Point& x : {Point{-1, 0, 0}, Point{3, 3, 3}, Point{5, -2, 1}}) {
    const auto H = sys.harmonic_measure(x);
    CHECK(std::accumulate(H.begin(), H.end(), 0.0) == doctest::Approx(sys.hitting_probability(x)).epsilon(1e-10));
    for (double h : H) CHECK(h >= -1e-14);
  }
  // from (-1, 0, 0) the nearest corner is hit most often
  const auto H = sys.harmonic_measure(Point{-1, 0, 0});
  const auto& pts = sys.profile().points;
  const auto& S = sys.support();
  std::size_t best = 0;
  for (std::size_t i = 1; i < H.size(); ++i) {
    if (H[i] > H[best]) best = i;
  }
  CHECK(pts[S[best]] == Point{0, 0, 0});
}

TEST_CASE("monte carlo hitting frequency for K = {0}") {
  // walks from e1 that reach the origin before leaving B(0, 40); the
  // escape through the boundary is then corrected with g(x)/g(0) at the exit
  Rng rng(21);
  const std::vector<Point> origin{Point{0, 0, 0}};
  const int walks = 4000;
  double hits = 0, sum2 = 0;
  for (int w = 0; w < walks; ++w) {
    Point x{1, 0, 0};
    double value = 0;
    while (true) {
      x = srw_step(x, rng);
      if (x.norm_inf() == 0) {
        value = 1;
        break;
      }
      if (x.norm_inf() >= 12) {
        value = g3()(x) / g3().at_origin();
        break;
      }
    }
    hits += value;
    sum2 += value * value;
  }
  const double mean = hits / walks;
  const double sd = std::sqrt((sum2 / walks - mean * mean) / walks);
  CHECK(std::abs(mean - g3()(Point{1, 0, 0}) / g3().at_origin()) < 4 * sd);
}

TEST_CASE("conditioned kernels") {
  const std::vector<Point> origin{Point{0, 0, 0}};
  SUBCASE("hit mode next to the origin favours the origin") {
    const auto k = conditioned_kernel(g3(), Point{1, 0, 0}, origin, KernelMode::hit);
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(k[1] > 1.0 / 6);  // neighbours(x)[1] = x - e1 = 0
    // weights are proportional to h(y) = g(y)/g(0)
    CHECK(k[1] / k[0] == doctest::Approx(g3().at_origin() / g3()(Point{2, 0, 0})).epsilon(1e-10));
  }
  SUBCASE("avoid mode never steps into K") {
    const auto k = conditioned_kernel(g3(), Point{1, 0, 0}, origin, KernelMode::avoid);
    CHECK(k[1] == 0.0);
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("avoid mode far away is nearly uniform") {
    const auto k = conditioned_kernel(g3(), Point{30, 0, 0}, origin, KernelMode::avoid);
    for (double w : k) CHECK(std::abs(w - 1.0 / 6) < 1e-3);
  }
  SUBCASE("avoid-driven walks never hit K") {
    const auto K = box(2, 1, 1);
    const EquilibriumSystem sys(g3(), K);
    Rng rng(3);
    int hits = 0;
    for (int w = 0; w < 300; ++w) {
      Point x{-1, 0, 0};
      for (int t = 0; t < 200; ++t) {
        const auto kern = conditioned_kernel(sys, x, KernelMode::avoid);
        double r = uniform01(rng);
        std::size_t i = 0;
        while (i + 1 < kern.size() && r >= kern[i]) r -= kern[i++];
        x = neighbors(x)[i];
        hits += sys.contains(x);
      }
    }
    CHECK(hits == 0);
  }
}

TEST_CASE("support cap is enforced") {
  PotentialOptions opt;
  opt.support_cap = 10;
  CHECK_THROWS_AS(equilibrium_measure(g3(), box(3, 3, 3), opt), PotentialError);
  CHECK_THROWS(equilibrium_measure(g3(), std::vector<Point>{}));
}
