#include <doctest.h>

#include <cmath>
#include <random>

#include "groundsurf/pu_surface.hpp"
#include "oracles.hpp"

using namespace groundsurf;

namespace {

SlopeGrid random_grid(int nx, int ny, std::uint64_t seed, double gradient = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  SlopeGrid g(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      g.at(i, j) = Slope::from_gradient(Vec3(i + 0.5 + 0.3 * u(rng), j + 0.5 + 0.3 * u(rng), u(rng)),
                                        Vec2(gradient * u(rng), gradient * u(rng)));
  return g;
}

SlopeGrid plane_grid(int nx, int ny, const Vec2& grad, double d) {
  SlopeGrid g(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec3 c(i + 0.5, j + 0.5, grad.dot(Vec2(i + 0.5, j + 0.5)) + d);
      g.at(i, j) = Slope::from_gradient(c, grad);
    }
  return g;
}

}  // namespace

TEST_CASE("bspline_phi against the de Boor recursion") {
  CHECK(std::abs(bspline_phi<double>(0, 0.5).value - 5.0 / 6.0) <= 1e-12);
  CHECK(std::abs(oracle::phi_de_boor(0, 0.5) - 5.0 / 6.0) <= 1e-12);
  CHECK(std::abs(bspline_phi_offset<double>(0.5).value - 0.5) <= 1e-12);
  CHECK(std::abs(bspline_phi_offset<double>(-0.5).value - 0.5) <= 1e-12);
  CHECK(bspline_phi_offset<double>(1.5).value == 0.0);
  CHECK(bspline_phi_offset<double>(-1.5).value == 0.0);
  CHECK(bspline_phi_offset<double>(2.7).value == 0.0);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int t = 0; t < 1000; ++t) {
    const double x = u(rng);
    const int i = t % 5 - 2;
    CHECK(std::abs(bspline_phi<double>(i, x).value - oracle::phi_de_boor(i, x)) <= 1e-12);
  }
  for (int t = 0; t < 100; ++t) {
    const double x = u(rng);
    CHECK(std::abs(bspline_phi_offset<double>(x).value - bspline_phi_offset<double>(-x).value) <= 1e-15);
  }
}

TEST_CASE("bspline_phi derivatives match finite differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.6, 1.6);
  const double h = 1e-6;
  for (int t = 0; t < 200; ++t) {
    const double x = u(rng);
    const auto j = bspline_phi_offset<double>(x);
    const double d1 = oracle::central_difference([](double s) { return bspline_phi_offset<double>(s).value; }, x, h);
    const double d2 = oracle::central_difference([](double s) { return bspline_phi_offset<double>(s).d1; }, x, h);
    CHECK(std::abs(d1 - j.d1) <= 1e-7);
    CHECK(std::abs(d2 - j.d2) <= 1e-5);
  }
}

TEST_CASE("exp_phi shape") {
  CHECK(exp_phi(0.0, 1.0, 1.0) == 1.0);
  CHECK(exp_phi(1.0, 1.0, 1.0) == 0.0);
  CHECK(exp_phi(-1.0, 1.0, 1.0) == 0.0);
  CHECK(exp_phi(3.0, 1.0, 2.0) == 0.0);
  CHECK(std::abs(exp_phi(0.5, 1.0, 1.0) - 0.5) <= 1e-15);
  CHECK(std::abs(exp_phi(1.0, 1.0, 2.0) - 0.5) <= 1e-15);
  // Clamped limits near the ends stay finite and ordered.
  CHECK(exp_phi(1e-300, 1.0, 1.0) == 1.0);
  CHECK(exp_phi(1.0 - 1e-16, 1.0, 1.0) == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 1000; ++t) {
    const double d = u(rng);
    CHECK(std::abs(exp_phi(d, 1.0, 1.0) + exp_phi(1.0 - d, 1.0, 1.0) - 1.0) <= 1e-14);
    CHECK(std::abs(exp_phi(2 * d, 2.5, 2.0) + exp_phi(2.0 - 2 * d, 2.5, 2.0) - 1.0) <= 1e-14);
  }
  double prev = 1.0;
  for (int k = 1; k < 1000; ++k) {
    // Saturates to 1 and 0 in double precision near the ends.
    const double v = exp_phi(k / 1000.0, 1.0, 1.0);
    CHECK(v <= prev);
    if (k > 50 && k < 950) CHECK(v < prev);
    prev = v;
  }
  const double h = 1e-6;
  for (int t = 0; t < 200; ++t) {
    const double x = 2 * u(rng) - 1;
    const double fd = oracle::central_difference([](double s) { return exp_phi(s, 1.0, 1.0); }, x, h);
    CHECK(std::abs(fd - exp_phi_jet(x, 1.0, 1.0).d1) <= 1e-6);
  }
}

TEST_CASE("partition of unity in 1D and 2D") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 20);
  const GroundSurface bs(plane_grid(20, 20, Vec2::Zero(), 0));
  const GroundSurface ex(plane_grid(20, 20, Vec2::Zero(), 0), BasisParams{Basis::exponential});
  for (const GroundSurface* s : {&bs, &ex}) {
    double worst1 = 0, worst2 = 0;
    for (int t = 0; t < 10000; ++t) {
      const double x = u(rng), y = u(rng);
      const auto [i, j] = s->cell_of(x, y);
      double sx = 0, sy = 0;
      for (int k = -1; k <= 1; ++k) {
        sx += s->weight(i + k, x).value;
        sy += s->weight(j + k, y).value;
      }
      double tensor = 0;
      for (int b = -1; b <= 1; ++b)
        for (int a = -1; a <= 1; ++a) tensor += s->weight(i + a, x).value * s->weight(j + b, y).value;
      worst1 = std::max(worst1, std::abs(sx - 1.0));
      worst2 = std::max(worst2, std::abs(tensor - 1.0));
    }
    CHECK(worst1 <= 1e-12);
    CHECK(worst2 <= 1e-12);
  }
}

TEST_CASE("local_plane_eval") {
  const Slope flat{Vec3(0.2, 0.3, 7), Vec3::UnitZ()};
  CHECK(flat.height(100, -50) == 7.0);
  const Slope zx = Slope::from_gradient(Vec3(1, 1, 1), Vec2(1, 0));
  CHECK(std::abs(zx.height(3, 7) - 3.0) <= 1e-14);
  const Slope any = Slope::from_gradient(Vec3(0.4, 2.1, -3), Vec2(0.7, -1.2));
  CHECK(any.height(0.4, 2.1) == doctest::Approx(-3.0));
  CHECK((any.gradient() - Vec2(0.7, -1.2)).norm() <= 1e-14);
}

TEST_CASE("blend reproduces a plane for both bases") {
  const Vec2 grad(0.2, -0.35);
  for (auto kind : {Basis::bspline, Basis::exponential}) {
    const GroundSurface s(plane_grid(7, 5, grad, 1.5), BasisParams{kind});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0, 7), uy(0, 5);
    for (int t = 0; t < 500; ++t) {
      const double x = ux(rng), y = uy(rng);
      CHECK(std::abs(s.eval(x, y) - (grad.dot(Vec2(x, y)) + 1.5)) <= 1e-10);
      CHECK((s.gradient(x, y) - grad).norm() <= 1e-9);
    }
    // Closed domain corners.
    CHECK(std::abs(s.eval(7, 5) - (grad.dot(Vec2(7, 5)) + 1.5)) <= 1e-10);
    CHECK(std::abs(s.eval(0, 0) - 1.5) <= 1e-10);
    CHECK_THROWS_AS(s.eval(7.0001, 1), Error);
    CHECK_THROWS_AS(s.eval(-1e-12, 1), Error);
  }
}

TEST_CASE("blend at a cell center equals the direct nine-term sum") {
  const auto g = random_grid(6, 6, 6);
  const GroundSurface s(g);
  const double x = 2.5, y = 3.5;
  double direct = 0.0;
  for (int b = 2; b <= 4; ++b)
    for (int a = 1; a <= 3; ++a)
      direct += oracle::phi_de_boor(a, x) * oracle::phi_de_boor(b, y) * g.at(a, b)->height(x, y);
  CHECK(std::abs(s.eval(x, y) - direct) <= 1e-12);
  // Weights 1/12, 5/6, 1/12 per axis.
  CHECK(std::abs(oracle::phi_de_boor(1, x) - 1.0 / 12.0) <= 1e-14);
}

TEST_CASE("blend gradient matches finite differences") {
  for (auto kind : {Basis::bspline, Basis::exponential}) {
    const GroundSurface s(random_grid(8, 8, 7), BasisParams{kind});
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.01, 7.99);
    const double h = 1e-4;
    for (int t = 0; t < 200; ++t) {
      const double x = u(rng), y = u(rng);
      const Vec2 g = s.gradient(x, y);
      const double fx = oracle::central_difference([&](double q) { return s.eval(q, y); }, x, h);
      const double fy = oracle::central_difference([&](double q) { return s.eval(x, q); }, y, h);
      // The exponential blend has large third derivatives near bump edges.
      const double tol = kind == Basis::bspline ? 1e-5 : 1e-3;
      CHECK(std::abs(fx - g.x()) <= tol);
      CHECK(std::abs(fy - g.y()) <= tol);
    }
  }
}

TEST_CASE("bspline blend is C2 across cell boundaries") {
  const GroundSurface s(random_grid(16, 16, 9));
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> edge(1, 15);
  std::uniform_real_distribution<double> along(0.1, 15.9);
  const double h = 1e-3;
  for (int t = 0; t < 100; ++t) {
    const double b = edge(rng), w = along(rng);
    auto fx = [&](double q) { return s.eval(q, w); };
    auto fy = [&](double q) { return s.eval(w, q); };
    CHECK(std::abs(oracle::one_sided_second_derivative(fx, b, h, -1) -
                   oracle::one_sided_second_derivative(fx, b, h, +1)) <= 1e-4);
    CHECK(std::abs(oracle::one_sided_second_derivative(fy, b, h, -1) -
                   oracle::one_sided_second_derivative(fy, b, h, +1)) <= 1e-4);
  }
}

TEST_CASE("exponential blend is C0 and C1 across cell boundaries") {
  const GroundSurface s(random_grid(10, 10, 11), BasisParams{Basis::exponential});
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> edge(1, 9);
  std::uniform_real_distribution<double> along(0.1, 9.9);
  const double h = 1e-3;
  for (int t = 0; t < 100; ++t) {
    const double b = edge(rng), w = along(rng);
    auto fx = [&](double q) { return s.eval(q, w); };
    CHECK(std::abs(fx(b - 1e-9) - fx(b + 1e-9)) <= 1e-6);
    CHECK(std::abs(oracle::one_sided_first_derivative(fx, b, h, -1) -
                   oracle::one_sided_first_derivative(fx, b, h, +1)) <= 1e-4);
  }
}

TEST_CASE("locality of a single slope change") {
  const auto g = random_grid(12, 12, 13);
  auto changed = g;
  const int ci = 5, cj = 6;
  changed.at(ci, cj)->centroid.z() += 1.0;
  changed.at(ci, cj)->normal = Vec3(0.3, -0.2, 1).normalized();
  for (auto kind : {Basis::bspline, Basis::exponential}) {
    const GroundSurface a(g, BasisParams{kind}), b(changed, BasisParams{kind});
    const double radius = kind == Basis::bspline ? 3.0 : 1.0;
    bool changed_inside = false;
    for (int q = 0; q <= 240; ++q)
      for (int r = 0; r <= 240; ++r) {
        const double x = q * 0.05, y = r * 0.05;
        const double diff = a.eval(x, y) - b.eval(x, y);
        // Outside the support of phi_ci(x) phi_cj(y) the surfaces agree exactly.
        const double half_width = kind == Basis::bspline ? 1.5 : 1.0;
        const bool outside = std::abs(x - (ci + 0.5)) >= half_width ||
                             std::abs(y - (cj + 0.5)) >= half_width;
        if (outside) CHECK(diff == 0.0);
        else if (diff != 0.0) changed_inside = true;
        // Never beyond the stated radius in cells.
        if (std::abs(x - (ci + 0.5)) > radius || std::abs(y - (cj + 0.5)) > radius) CHECK(diff == 0.0);
      }
    CHECK(changed_inside);
  }
}

TEST_CASE("sample_surface") {
  const GroundSurface flat(plane_grid(4, 3, Vec2::Zero(), 5.0));
  auto r = sample_surface(flat, 2, 2);
  REQUIRE(r.xyz.cols() == 4);
  CHECK(r.xyz.col(0).head<2>() == Vec2(0, 0));
  CHECK(r.xyz.col(1).head<2>() == Vec2(4, 0));
  CHECK(r.xyz.col(2).head<2>() == Vec2(0, 3));
  CHECK(r.xyz.col(3).head<2>() == Vec2(4, 3));
  r = sample_surface(flat, 9, 7);
  CHECK(r.xyz.cols() == 63);
  CHECK(r.xyz.row(2).isConstant(5.0, 1e-12));
  CHECK_THROWS_AS(sample_surface(flat, 1, 5), Error);

  const GroundSurface s(random_grid(4, 3, 14));
  const auto coarse = sample_surface(s, 9, 7);
  const auto fine = sample_surface(s, 17, 13);
  for (int j = 0; j < 7; ++j)
    for (int i = 0; i < 9; ++i)
      CHECK(std::abs(coarse.xyz(2, j * 9 + i) - fine.xyz(2, 2 * j * 17 + 2 * i)) <= 1e-12);
}

TEST_CASE("GroundSurface preconditions") {
  SlopeGrid holes = plane_grid(3, 3, Vec2::Zero(), 0);
  holes.at(1, 1).reset();
  CHECK_THROWS_AS(GroundSurface{holes}, Error);
  CHECK_THROWS_AS(GroundSurface(SlopeGrid(2, 2, 1)), Error);
  CHECK_THROWS_AS(GroundSurface(plane_grid(3, 3, Vec2::Zero(), 0), BasisParams{Basis::exponential, 1.0, 2.0}), Error);
}

TEST_CASE("polynomial surface matches direct evaluation") {
  const GroundSurface s(random_grid(9, 6, 15));
  const PolynomialSurface p(s);
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> ux(0, 9), uy(0, 6);
  for (int t = 0; t < 2000; ++t) {
    const double x = ux(rng), y = uy(rng);
    CHECK(std::abs(p.eval(x, y) - s.eval(x, y)) <= 1e-12);
  }
  CHECK(std::abs(p.eval(9, 6) - s.eval(9, 6)) <= 1e-12);
  CHECK_THROWS_AS(PolynomialSurface(GroundSurface(random_grid(2, 2, 1), BasisParams{Basis::exponential})), Error);
}
