#include "chshmdi/lp.hpp"

#include "doctest.h"
#include "lp_oracle.hpp"

#include <random>
#include <sstream>

using namespace chshmdi::lp;
using Vec = Eigen::VectorXd;

namespace {

LinearProgram<double> random_problem(std::mt19937_64& rng, bool allow_equality) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LinearProgram<double> lp(5, 0);
  for (int j = 0; j < 5; ++j) {
    lp.lower(j) = -unit(rng);
    lp.upper(j) = unit(rng);
    lp.objective(j) = coef(rng);
  }
  for (int i = 0; i < 4; ++i) {
    Vec row(5);
    for (int j = 0; j < 5; ++j) row(j) = coef(rng);
    const double pick = unit(rng);
    Relation rel = pick < 0.45 ? Relation::LessEqual : Relation::GreaterEqual;
    if (allow_equality && pick > 0.85) rel = Relation::Equal;
    lp.add_constraint(row, rel, 0.5 * coef(rng));
  }
  lp.direction = unit(rng) < 0.5 ? Direction::Minimize : Direction::Maximize;
  return lp;
}

}  // namespace

TEST_CASE("bound-attained minimum") {
  LinearProgram<double> lp(1, 0);
  lp.lower(0) = 0.2;
  lp.upper(0) = 1.0;
  lp.objective(0) = 1.0;
  const auto sol = solve(lp);
  CHECK(sol.status == Status::Optimal);
  CHECK(sol.value == doctest::Approx(0.2).epsilon(1e-15));

  const auto rep = check_feasible(lp, sol.assignment);
  CHECK(rep.feasible);
  CHECK(rep.max_violation == 0.0);
}

TEST_CASE("two-variable equality") {
  LinearProgram<double> lp(2, 0);
  lp.upper.setOnes();
  lp.objective << 1.0, 1.0;
  lp.add_constraint(Vec{{1.0, 2.0}}, Relation::Equal, 1.0);
  const auto sol = solve(lp);
  REQUIRE(sol.status == Status::Optimal);
  CHECK(sol.value == doctest::Approx(0.5));
  CHECK(sol.assignment(0) == doctest::Approx(0.0));
  CHECK(sol.assignment(1) == doctest::Approx(0.5));

  const auto rep = check_feasible(lp, Vec{{0.0, 0.0}});
  CHECK_FALSE(rep.feasible);
  CHECK(rep.max_violation == doctest::Approx(1.0));
}

TEST_CASE("infeasible and unbounded are statuses") {
  LinearProgram<double> lp(1, 0);
  lp.upper(0) = 1.0;
  lp.objective(0) = 1.0;
  lp.add_constraint(Vec{{1.0}}, Relation::GreaterEqual, 2.0);
  CHECK(solve(lp).status == Status::Infeasible);

  LinearProgram<double> free(2, 0);
  free.lower.setConstant(-std::numeric_limits<double>::infinity());
  free.objective << 1.0, 0.0;
  free.add_constraint(Vec{{1.0, 1.0}}, Relation::LessEqual, 1.0);
  CHECK(solve(free).status == Status::Unbounded);
}

TEST_CASE("malformed problems are domain errors") {
  LinearProgram<double> lp(2, 0);
  lp.lower(0) = 1.0;
  lp.upper(0) = 0.0;
  CHECK_THROWS_AS(solve(lp), std::domain_error);

  LinearProgram<double> nan(1, 1);
  nan.rows(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve(nan), std::domain_error);
}

TEST_CASE("random problems agree with vertex enumeration") {
  std::mt19937_64 rng(20240611);
  int feasible = 0;
  for (int t = 0; t < 200; ++t) {
    const auto lp = random_problem(rng, true);
    const auto expect = oracle::vertex_enumeration(lp);
    const auto sol = solve(lp);
    if (!expect) {
      CHECK(sol.status == Status::Infeasible);
      continue;
    }
    ++feasible;
    REQUIRE(sol.status == Status::Optimal);
    CHECK(std::abs(sol.value - *expect) <= 1e-7);
    CHECK(check_feasible(lp, sol.assignment).max_violation <= 1e-9);
  }
  CHECK(feasible > 100);
}

TEST_CASE("reported minimum never exceeds a sampled feasible point") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    auto lp = random_problem(rng, false);
    lp.direction = Direction::Minimize;
    const auto sol = solve(lp);
    if (sol.status != Status::Optimal) continue;
    int samples = 0;
    for (int tries = 0; tries < 200000 && samples < 100; ++tries) {
      Vec x(5);
      for (int j = 0; j < 5; ++j) x(j) = lp.lower(j) + unit(rng) * (lp.upper(j) - lp.lower(j));
      if (!check_feasible(lp, x, 0.0).feasible) continue;
      ++samples;
      CHECK(sol.value <= lp.objective.dot(x) + 1e-12);
    }
    checked += samples;
  }
  CHECK(checked > 1000);
}

TEST_CASE("determinism and objective scaling") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 50; ++t) {
    auto lp = random_problem(rng, true);
    const auto a = solve(lp);
    const auto b = solve(lp);
    REQUIRE(a.status == b.status);
    if (a.status != Status::Optimal) continue;
    CHECK(a.value == b.value);
    CHECK(a.assignment == b.assignment);

    auto scaled = lp;
    scaled.objective *= 3.5;
    const auto s = solve(scaled);
    REQUIRE(s.status == Status::Optimal);
    CHECK(std::abs(s.value - 3.5 * a.value) <= 1e-9);
    CHECK((s.assignment - a.assignment).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("warm re-solve matches a cold solve") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    auto lp = random_problem(rng, true);
    SimplexSolver<double> warm(lp);
    const auto first = warm.solve();
    if (first.status != Status::Optimal) continue;
    Vec other = Vec::Random(5);
    auto cold_lp = lp;
    cold_lp.objective = other;
    cold_lp.direction = Direction::Maximize;
    const auto cold = solve(cold_lp);
    const auto again = warm.solve(other, Direction::Maximize);
    REQUIRE(again.status == Status::Optimal);
    CHECK(std::abs(again.value - cold.value) <= 1e-9);
  }
}

TEST_CASE("badly scaled rows keep relative accuracy") {
  // Probability-scale data: gains near 1e-9 with coefficients of order one.
  LinearProgram<double> lp(3, 0);
  lp.upper.setOnes();
  lp.objective << 0.0, 1.0, 0.0;
  lp.add_constraint(Vec{{0.98, 1e-4, 1e-2}}, Relation::LessEqual, 3.0e-9);
  lp.add_constraint(Vec{{0.98, 1e-4, 1e-2}}, Relation::GreaterEqual, 2.9e-9);
  lp.add_constraint(Vec{{1.0, 0.0, 0.0}}, Relation::Equal, 7.0e-11);
  lp.add_constraint(Vec{{0.0, 0.0, 1.0}}, Relation::LessEqual, 1.0e-8);
  const auto sol = solve(lp);
  REQUIRE(sol.status == Status::Optimal);
  const double expect = (2.9e-9 - 0.98 * 7.0e-11 - 1e-2 * 1.0e-8) / 1e-4;
  CHECK(sol.value == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("LP text dump") {
  LinearProgram<double> lp(2, 0);
  lp.upper.setOnes();
  lp.objective << 1.0, -2.0;
  lp.add_constraint(Vec{{1.0, 2.0}}, Relation::Equal, 1.0);
  std::ostringstream os;
  write_lp_format(os, lp);
  const std::string text = os.str();
  CHECK(text.find("Minimize") == 0);
  CHECK(text.find("obj: 1 x0 - 2 x1") != std::string::npos);
  CHECK(text.find("c0: 1 x0 + 2 x1 = 1") != std::string::npos);
  CHECK(text.find("0 <= x1 <= 1") != std::string::npos);
}
