#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "homog/algebra.hpp"
#include "homog/errors.hpp"

using namespace homog;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force mean over one period by a fine midpoint sum; independent of
// the adaptive quadrature used by the library.
double brute_mean(const std::function<double(double)>& f, double period,
                  std::size_t n = 4'000'000) {
  long double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += f(period * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return static_cast<double>(s / n);
}

double stefan_inverse_right(double r) { return r >= 0.0 ? r + 0.5 : r - 0.5; }

AlgebraFn shifted_cos(double offset) {
  Periodic p;
  p.period = {1.0, 1.0};
  p.rule = [offset](const Point& y) { return offset + std::cos(2.0 * kPi * y[0]); };
  return AlgebraFn(1, p, "shifted_cos");
}

}  // namespace

TEST_CASE("eval of presets") {
  const AlgebraFn psi = presets::stefan_psi0();
  CHECK(psi(0.0) == doctest::Approx(0.0));
  CHECK(psi(1.0) == doctest::Approx(1.0));
  CHECK(psi(-1.0) == doctest::Approx(-1.0));
  CHECK(psi(2.0) == doctest::Approx(0.0));
  CHECK(psi(5.0) == doctest::Approx(1.0));
  CHECK(presets::constant(1.0)(123.4) == 1.0);

  const AlgebraFn pap = presets::pap_cos_decay();
  const AlgebraFn qp = presets::qp_cos_sqrt2();
  for (double y : {-7.3, 0.0, 0.4, 11.0}) {
    CHECK(qp(y) == doctest::Approx(std::cos(y) + std::cos(std::sqrt(2.0) * y)).epsilon(1e-12));
    CHECK(pap(y) == doctest::Approx(qp(y) + 1.0 / (1.0 + std::abs(y))).epsilon(1e-12));
  }
}

TEST_CASE("representation invariants on random samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-50.0, 50.0);
  for (const std::string& name : presets::names()) {
    const AlgebraFn fn = presets::by_name(name);
    for (int k = 0; k < 200; ++k) {
      const double y = dist(rng);
      if (const auto* p = std::get_if<Periodic>(&fn.kind())) {
        CHECK(std::abs(fn(y + p->period[0]) - fn(y)) < 1e-12);
      }
      if (const auto* p = std::get_if<Perturbed>(&fn.kind())) {
        CHECK(std::abs(p->tail({y, 0.0})) <= p->decay_bound / (1.0 + std::abs(y)) + 1e-15);
      }
    }
  }
}

TEST_CASE("mean values") {
  CHECK(std::abs(mean(presets::stefan_psi0())) < 1e-10);
  CHECK(mean(shifted_cos(3.0)) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(mean(presets::qp_cos_sqrt2())) < 1e-10);
  // The decaying tail drops out of the mean.
  CHECK(std::abs(mean(presets::pap_cos_decay())) < 1e-10);
  CHECK(mean(presets::tent4()) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("mean is translation invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (const std::string& name : {"tent4", "cos1", "qp_cos_sqrt2", "clamped_psi0"}) {
    const AlgebraFn fn = presets::by_name(name);
    const double m = mean(fn);
    for (int k = 0; k < 5; ++k) {
      const AlgebraFn moved = translate(fn, {dist(rng), 0.0});
      CHECK(mean(moved) == doctest::Approx(m).epsilon(1e-10));
    }
  }
}

TEST_CASE("compose_mean against brute-force oracles") {
  const AlgebraFn psi[] = {presets::stefan_psi0()};
  const auto id = [](std::span<const double> c) { return c[0]; };
  CHECK(std::abs(compose_mean(psi, id)) < 1e-10);

  // Closed form: (1/2) int_{-1}^{1} G(0.5 - s) ds = 0.75.
  const double oracle = brute_mean(
      [&](double y) { return stefan_inverse_right(0.5 - psi[0](y)); }, 4.0);
  CHECK(oracle == doctest::Approx(0.75).epsilon(1e-6));
  const double got = compose_mean(
      psi, [](std::span<const double> c) { return stefan_inverse_right(0.5 - c[0]); });
  CHECK(got == doctest::Approx(0.75).epsilon(1e-10));

  const double sq_oracle = brute_mean([&](double y) { return psi[0](y) * psi[0](y); }, 4.0);
  CHECK(sq_oracle == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(compose_mean(psi, [](std::span<const double> c) { return c[0] * c[0]; }) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-11));

  // Jumps at non-dyadic positions are resolved by the adaptive scheme.
  for (double v : {0.1234567, -0.777, 0.31}) {
    const double expected = v + v / 2.0;  // 3v/2 inside [-1, 1]
    CHECK(compose_mean(psi, [v](std::span<const double> c) {
            return stefan_inverse_right(v - c[0]);
          }) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("compose_mean rejects mixed representations") {
  const AlgebraFn mixed[] = {presets::stefan_psi0(), presets::qp_cos_sqrt2()};
  CHECK_THROWS_AS(compose_mean(mixed, [](std::span<const double>) { return 0.0; }),
                  IncompatibleRepresentations);
  const AlgebraFn periods[] = {presets::stefan_psi0(), presets::cos1()};
  CHECK_THROWS_AS(compose_mean(periods, [](std::span<const double>) { return 0.0; }),
                  IncompatibleRepresentations);
  // Same winding: a torus lift and its perturbation compose.
  const AlgebraFn lifts[] = {presets::qp_cos_sqrt2(), presets::pap_cos_decay()};
  CHECK(compose_mean(lifts, [](std::span<const double> c) { return c[0] * c[1]; }) ==
        doctest::Approx(1.0).epsilon(1e-9));  // mean of (cos a + cos b)^2 = 1
}

TEST_CASE("ball averages") {
  CHECK(ball_average(presets::constant(5.0), {3.3, 0.0}, 0.7) == doctest::Approx(5.0));
  CHECK(std::abs(ball_average(presets::stefan_psi0(), {0.0, 0.0}, 2.0)) < 1e-12);
  for (double t : {0.3, 1.1, 2.7}) {
    const double exact = std::sin(2.0 * kPi * t) / (2.0 * kPi * t);
    CHECK(ball_average(presets::cos1(), {0.0, 0.0}, t) == doctest::Approx(exact).epsilon(1e-4));
  }
  // Two-dimensional disk of a constant.
  CHECK(ball_average(presets::constant(2.0, 2), {0.0, 0.0}, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("ergodicity defect") {
  const std::vector<Point> centers = random_centers(1, 32, 10.0, 2024);
  const std::vector<double> radii = {1.0, 2.0, 4.0};
  for (double d : ergodicity_defect(presets::constant(3.0), radii, centers))
    CHECK(d < 1e-24);

  // Whole periods of psi0 average to zero exactly.
  const std::vector<double> whole = {2.0, 4.0, 8.0, 16.0};
  for (double d : ergodicity_defect(presets::stefan_psi0(), whole, centers))
    CHECK(d < 1e-20);
  const std::vector<double> partial = {1.0, 3.0, 7.0, 15.0};
  const auto tent = ergodicity_defect(presets::stefan_psi0(), partial, centers);
  for (double d : tent) CHECK(d > 0.0);
  CHECK(tent.back() < tent.front() / 4.0);

  // Closed form: average over centers c of (sin(2 pi t) cos(2 pi c) / (2 pi t))^2.
  const std::vector<double> cr = {0.75, 1.75, 3.75, 7.75};
  const auto defect = ergodicity_defect(presets::cos1(), cr, centers);
  for (std::size_t k = 0; k < cr.size(); ++k) {
    const double t = cr[k];
    double expected = 0.0;
    for (const Point& c : centers) {
      const double b = std::sin(2 * kPi * t) * std::cos(2 * kPi * c[0]) / (2 * kPi * t);
      expected += b * b;
    }
    expected /= static_cast<double>(centers.size());
    CHECK(defect[k] == doctest::Approx(expected).epsilon(1e-3));
  }
  CHECK(defect.back() < defect.front() / 4.0);
  CHECK_THROWS(ergodicity_defect(presets::cos1(), cr, std::span(centers).first(8)));
}

TEST_CASE("level-set measure") {
  const AlgebraFn psi = presets::stefan_psi0();
  const MeasureEstimate at0 = level_set_measure(psi, 0.0);
  for (std::size_t k = 0; k < at0.estimates.size(); ++k)
    CHECK(at0.estimates[k] == doctest::Approx(at0.delta_schedule[k]).epsilon(1e-6));
  CHECK(at0.extrapolated < 1e-3);
  CHECK(at0.converged);

  // Brute-force sampling oracle for the plateau: {psi0 >= 1/2} has length 1
  // out of period 4.
  const AlgebraFn clamped = presets::clamped_psi0();
  const double plateau = brute_mean(
      [&](double y) { return clamped(y) == 0.5 ? 1.0 : 0.0; }, 4.0, 1'000'000);
  CHECK(plateau == doctest::Approx(0.25).epsilon(1e-5));
  const MeasureEstimate top = level_set_measure(clamped, 0.5);
  CHECK(top.extrapolated == doctest::Approx(plateau).epsilon(1e-4));

  const MeasureEstimate outside = level_set_measure(psi, 3.0);
  CHECK(outside.extrapolated == 0.0);
  for (double e : outside.estimates) CHECK(e == 0.0);

  const MeasureEstimate everything = level_set_measure(presets::constant(0.2), 0.2);
  CHECK(everything.extrapolated == doctest::Approx(1.0));
}

TEST_CASE("level-set density proxy sums to at most one") {
  const std::vector<double> schedule = {1e-1, 3e-2, 1e-2};
  for (const std::string& name : {"stefan_psi0", "clamped_psi0"}) {
    const AlgebraFn fn = presets::by_name(name);
    double total = 0.0;
    const double spacing = 3.0 / 100.0;
    for (int k = 0; k < 100; ++k) {
      const double alpha = -1.5 + spacing * (k + 0.5);
      total += level_set_measure(fn, alpha, schedule).extrapolated * spacing;
    }
    CHECK(total <= 1.0 + 1e-6);
  }
}

TEST_CASE("strongly regular values") {
  const AlgebraFn s = presets::sin2pi();
  // Oracle: min over a fine grid of sin^2 + (2 pi cos)^2 (= 1, at the extrema).
  double brute = 1e300;
  for (int i = 0; i < 100000; ++i) {
    const double y = (i + 0.5) / 100000.0;
    const double a = std::sin(2 * kPi * y), g = 2 * kPi * std::cos(2 * kPi * y);
    brute = std::min(brute, a * a + g * g);
  }
  const RegularityCertificate zero = strongly_regular(s, 0.0);
  CHECK(zero.certified);
  CHECK(zero.margin == doctest::Approx(brute).epsilon(1e-3));

  const RegularityCertificate top = strongly_regular(s, 1.0);
  CHECK_FALSE(top.certified);
  CHECK(top.margin < top.coarse_margin / 2.0);

  const RegularityCertificate flat = strongly_regular(presets::constant(0.3), 1.0);
  CHECK(flat.certified);
  CHECK(flat.margin == doctest::Approx(0.49));

  Periodic bare;
  bare.rule = [](const Point& y) { return y[0]; };
  CHECK_THROWS_AS(strongly_regular(AlgebraFn(1, bare), 0.0), MissingGradient);

  // Certification implies a null level set.
  for (double alpha : {-0.6, -0.3, 0.0, 0.45, 0.6}) {
    const RegularityCertificate c = strongly_regular(s, alpha);
    REQUIRE(c.certified);
    CHECK(level_set_measure(s, alpha).extrapolated < 1e-3);
  }

  // Torus lifts use the chain rule through the winding matrix.
  const RegularityCertificate qp = strongly_regular(presets::qp_cos_sqrt2(), 3.0);
  CHECK(qp.certified);
  CHECK(qp.margin == doctest::Approx(1.0).epsilon(1e-3));  // (2-3)^2 at the peak
}

TEST_CASE("structured records round-trip") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-20.0, 20.0);
  std::vector<AlgebraFn> fns;
  for (const std::string& name : presets::names()) fns.push_back(presets::by_name(name));
  fns.push_back(presets::cosine(0.3, 4.0));
  fns.push_back(translate(presets::stefan_psi0(), {0.7, 0.0}));
  for (const AlgebraFn& fn : fns) {
    const nlohmann::json rec = nlohmann::json::parse(fn.describe().dump());
    const AlgebraFn back = from_record(rec);
    CHECK(back.describe() == fn.describe());
    for (int k = 0; k < 20; ++k) {
      const double y = dist(rng);
      CHECK(back(y) == doctest::Approx(fn(y)).epsilon(1e-13));
    }
  }
}
