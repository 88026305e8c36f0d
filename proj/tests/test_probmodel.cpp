#include <hillquota/probmodel.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "support/helpers.hpp"

using namespace hillquota;

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
  const auto& g3 = detail::gauss_legendre(3);
  REQUIRE(g3.x.size() == 3);
  double s = 0;
  for (std::size_t i = 0; i < 3; ++i) s += g3.w[i] * std::pow(g3.x[i], 5);
  CHECK_THAT(s, Catch::Matchers::WithinRel(1.0 / 6.0, 1e-14));

  double wsum = 0;
  for (double w : detail::gauss_legendre(16).w) wsum += w;
  CHECK_THAT(wsum, Catch::Matchers::WithinRel(1.0, 1e-14));

  // the cache hands back the same object
  CHECK(&detail::gauss_legendre(7) == &detail::gauss_legendre(7));
}

TEST_CASE("triangle rule is exact for polynomials within its degree") {
  const auto& g = detail::gauss_legendre(4);
  auto f = [](double x, double y) { return x * x * y; };
  double v = detail::triangle_rule(f, {0, 0}, {1, 0}, {0, 1}, g);
  CHECK_THAT(v, Catch::Matchers::WithinRel(1.0 / 60.0, 1e-13));

  auto one = [](double, double) { return 1.0; };
  CHECK_THAT(detail::triangle_rule(one, {0, 0}, {2, 0}, {0, 3}, g),
             Catch::Matchers::WithinRel(3.0, 1e-14));
  CHECK(detail::triangle_rule(one, {0, 0}, {1, 1}, {2, 2}, g) == 0.0);
}

TEST_CASE("density factories validate their inputs") {
  CHECK_THROWS_AS(density_model::uniform_population(-1, 5), domain_error);
  CHECK_THROWS_AS(density_model::uniform_population(5, 5), domain_error);
  CHECK_THROWS_AS(density_model::piecewise_population({0}, {}), domain_error);
  CHECK_THROWS_AS(density_model::piecewise_population({0, 1}, {1, 2}), domain_error);
  CHECK_THROWS_AS(density_model::piecewise_population({0, 1, 1}, {1, 1}), domain_error);
  CHECK_THROWS_AS(density_model::piecewise_population({0, 1, 2}, {1, -1}), domain_error);
  CHECK_THROWS_AS(density_model::piecewise_population({0, 1, 2}, {0, 0}), domain_error);
  CHECK_THROWS_AS(density_model::uniform_quota(2), domain_error);
}

TEST_CASE("piecewise density normalizes and inverts") {
  // two segments of height 1 and 3 on [0,2) and [2,4): mass 2 + 6 = 8
  auto d = density_model::piecewise_population({0, 2, 4}, {1, 3});
  CHECK_THAT(d.pdf(1.0), Catch::Matchers::WithinRel(1.0 / 8.0, 1e-15));
  CHECK_THAT(d.pdf(3.0), Catch::Matchers::WithinRel(3.0 / 8.0, 1e-15));
  CHECK(d.pdf(-0.5) == 0.0);
  CHECK(d.pdf(4.5) == 0.0);
  CHECK(d.quantile(0.0) == 0.0);
  CHECK_THAT(d.quantile(0.25), Catch::Matchers::WithinAbs(2.0, 1e-12));
  CHECK_THAT(d.quantile(1.0), Catch::Matchers::WithinAbs(4.0, 1e-12));
  CHECK_THAT(d.quantile(0.625), Catch::Matchers::WithinAbs(3.0, 1e-12));

  // a dead middle segment is skipped by the quantile
  auto gap = density_model::piecewise_population({0, 1, 2, 3}, {1, 0, 1});
  CHECK(gap.pdf(1.5) == 0.0);
  CHECK_THAT(gap.quantile(0.5 + 1e-9), Catch::Matchers::WithinAbs(2.0, 1e-6));
}

TEST_CASE("iid quota density matches the closed form for uniform populations") {
  const int M = 10;
  auto joint = iid_quota_density(density_model::uniform_population(0, 1000), M);
  REQUIRE(joint.kind == density_kind::joint_quota_pdf);
  const std::pair<double, double> probes[] = {{2.0, 3.0}, {1.5, 1.5}, {0.3, 4.0},
                                              {3.1, 3.2}};
  for (auto [q1, q2] : probes) {
    double q3 = M - q1 - q2;
    double qmax = std::max({q1, q2, q3});
    INFO("at (" << q1 << "," << q2 << ")");
    CHECK_THAT(joint.joint(q1, q2),
               Catch::Matchers::WithinRel(M / std::pow(qmax, 3.0), 1e-12));
  }
  CHECK_THROWS_AS(joint.joint(5.0, 5.0), domain_error);   // q3 = 0
  CHECK_THROWS_AS(joint.joint(-1.0, 2.0), domain_error);  // q1 < 0

  CHECK_THROWS_AS(iid_quota_density(density_model::uniform_quota(10), 10),
                  domain_error);
  CHECK_THROWS_AS(
      iid_quota_density(density_model::uniform_population(0, 1000), 10, 0),
      domain_error);
}

TEST_CASE("general quadrature reproduces the exact uniform probabilities") {
  for (int M : {5, 10, 16}) {
    double exact = exact_uniform_probability<double>(M);
    CHECK_THAT(general_pdf_probability(M, density_model::uniform_simplex()),
               Catch::Matchers::WithinRel(exact, 1e-8));
    CHECK_THAT(general_pdf_probability(M, density_model::uniform_quota(M)),
               Catch::Matchers::WithinRel(exact, 1e-8));
  }
}

TEST_CASE("iid uniform-population probabilities match pinned references") {
  for (const auto& row : helpers::iid_table) {
    if (row.M > 10) continue;  // keep the unit suite quick
    auto joint = iid_quota_density(density_model::uniform_population(0, 1000), row.M);
    CHECK_THAT(general_pdf_probability(row.M, joint),
               Catch::Matchers::WithinAbs(row.value, 1e-6));
  }
}

TEST_CASE("probability is invariant under population scale") {
  auto a = iid_quota_density(density_model::uniform_population(0, 1000), 5);
  auto b = iid_quota_density(density_model::uniform_population(0, 250), 5);
  CHECK_THAT(general_pdf_probability(5, a),
             Catch::Matchers::WithinRel(general_pdf_probability(5, b), 1e-9));
}

TEST_CASE("piecewise single segment equals the uniform density") {
  auto u = iid_quota_density(density_model::uniform_population(0, 1000), 5);
  auto p = iid_quota_density(density_model::piecewise_population({0, 1000}, {1}), 5);
  CHECK_THAT(p.joint(1.2, 1.7), Catch::Matchers::WithinRel(u.joint(1.2, 1.7), 1e-13));
  CHECK_THAT(general_pdf_probability(5, p),
             Catch::Matchers::WithinRel(general_pdf_probability(5, u), 1e-10));
}

TEST_CASE("multi-segment piecewise with equal heights equals uniform") {
  // the extra breakpoint is a no-op kink; the split z-integral must agree
  auto u = iid_quota_density(density_model::uniform_population(0, 1000), 10);
  auto p = iid_quota_density(
      density_model::piecewise_population({0, 400, 1000}, {5, 5}), 10);
  CHECK_THAT(p.joint(2.2, 3.7), Catch::Matchers::WithinRel(u.joint(2.2, 3.7), 1e-12));
  CHECK_THAT(general_pdf_probability(10, p),
             Catch::Matchers::WithinRel(general_pdf_probability(10, u), 1e-9));
}

TEST_CASE("genuinely non-uniform piecewise density converges") {
  auto step = density_model::piecewise_population({0, 2, 4}, {1, 3});
  auto joint = iid_quota_density(step, 10);
  double prob = general_pdf_probability(10, joint);
  CHECK(prob > 0);
  CHECK(prob < 1);
  CHECK_THAT(density_normalization(10, joint),
             Catch::Matchers::WithinAbs(1.0, 1e-6));

  // same shape at a different population scale gives the same quota density
  auto scaled = iid_quota_density(
      density_model::piecewise_population({0, 250, 500}, {1, 3}), 10);
  CHECK_THAT(general_pdf_probability(10, scaled),
             Catch::Matchers::WithinRel(prob, 1e-7));
}

TEST_CASE("the joint density integrates to one over the simplex") {
  CHECK_THAT(density_normalization(10, density_model::uniform_quota(10)),
             Catch::Matchers::WithinAbs(1.0, 1e-12));
  auto joint = iid_quota_density(density_model::uniform_population(0, 1000), 10);
  CHECK_THAT(density_normalization(10, joint), Catch::Matchers::WithinAbs(1.0, 1e-6));
}

TEST_CASE("quadrature that cannot converge reports the worst cell") {
  auto joint = iid_quota_density(density_model::uniform_population(0, 1000), 10);
  quadrature_spec starved{1, 0, 1e-13, 64};
  try {
    general_pdf_probability(10, joint, starved);
    FAIL("expected computation_error");
  } catch (const computation_error& e) {
    CHECK(std::string(e.what()).find("worst cell") != std::string::npos);
  }
}

TEST_CASE("quadrature settings are validated") {
  auto u = density_model::uniform_quota(10);
  CHECK_THROWS_AS(general_pdf_probability(10, u, {0, 12, 1e-8, 64}), domain_error);
  CHECK_THROWS_AS(general_pdf_probability(10, u, {10, -1, 1e-8, 64}), domain_error);
  CHECK_THROWS_AS(general_pdf_probability(10, u, {10, 12, 1e-17, 64}), domain_error);
  CHECK_THROWS_AS(general_pdf_probability(10, u, {10, 12, 1e-8, 0}), domain_error);
  CHECK_THROWS_AS(general_pdf_probability(2, u), domain_error);
}

TEST_CASE("density specs parse or fail loudly") {
  auto u = parse_density("uniform:0:1000");
  CHECK(u.kind == density_kind::iid_population_pdf);
  CHECK(u.support_hi == 1000.0);
  CHECK(u.spec == "uniform:0:1000");

  std::string path = "/tmp/hillquota_piecewise_test.csv";
  {
    std::ofstream f(path);
    f << "# population density, height column ignored on the last row\n";
    f << "0,1\n2,3\n4,0\n";
  }
  auto p = parse_density("piecewise:" + path);
  CHECK(p.kind == density_kind::iid_population_pdf);
  CHECK(p.support_lo == 0.0);
  CHECK(p.support_hi == 4.0);
  CHECK_THAT(p.pdf(3.0), Catch::Matchers::WithinRel(3.0 / 8.0, 1e-15));
  std::remove(path.c_str());

  CHECK_THROWS_AS(parse_density("gaussian:0:1"), domain_error);
  CHECK_THROWS_AS(parse_density("uniform:0"), domain_error);
  CHECK_THROWS_AS(parse_density("uniform:a:b"), domain_error);
  CHECK_THROWS_AS(parse_density("piecewise:/nonexistent/file.csv"), domain_error);
  CHECK_THROWS_AS(parse_density(""), domain_error);
}
