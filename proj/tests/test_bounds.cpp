#include "chshmdi/bounds.hpp"

#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

using namespace chshmdi;

namespace {

constexpr double kTsirelson = 2.0 * std::numbers::sqrt2;
constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::vector<double>> kDecoySets = {{0.0, 0.01}, {0.0, 0.01, 0.02}, {0.0, 0.01, 0.02, 0.03}};
const std::vector<double> kFiveDecoys = {0.0, 0.01, 0.02, 0.03};

ProtocolConfig config_at(const std::vector<double>& decoys, double signal, double km) {
  return symmetric_config(decoys, signal).at_distance(km);
}

double oracle_ratio(const FockYieldTable& table, BasisTag tag) {
  return table.corr_sum(1, 1, tag) / table.yield_sum(1, 1, tag);
}

ChshTermBound term(BasisTag tag, double ratio, RatioSide side) {
  ChshTermBound b;
  b.tag = tag;
  b.ratio = ratio;
  b.side = side;
  return b;
}

}  // namespace

TEST_CASE("truncation policy") {
  TruncationPolicy p;
  CHECK(p.cutoff == 7);
  CHECK_NOTHROW(p.validate());
  p.cutoff = 1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.cutoff = 3;
  CHECK(p.var(1, 1) == 5);
  CHECK(p.slack(Intensity(0.5), Intensity(0.5)) == poisson_tail(0.5, 0.5, 3));
}

TEST_CASE("too few intensities is a configuration error") {
  const auto obs = observed_statistics(config_at({0.0}, 0.3, 10.0));
  CHECK_THROWS_AS(build_yield_lp(obs, TruncationPolicy{}), ConfigError);
  CHECK_THROWS_AS(build_chsh_lp(obs, TruncationPolicy{}, BasisTag::QS, ChshTarget::Numerator, lp::Direction::Minimize),
                  ConfigError);
}

TEST_CASE("yield program shape") {
  const auto obs = observed_statistics(config_at(kFiveDecoys, 0.3, 10.0));
  const TruncationPolicy policy;
  const auto y = build_yield_lp(obs, policy);
  CHECK(y.num_vars() == 64);
  CHECK(y.num_constraints() == 2 * 25);
  CHECK(y.objective(policy.var(1, 1)) == 1.0);
  CHECK(y.objective.sum() == 1.0);
  const auto c = build_chsh_lp(obs, policy, BasisTag::RT, ChshTarget::Denominator, lp::Direction::Maximize);
  CHECK(c.num_vars() == 128);
  CHECK(c.num_constraints() == 4 * 25);
  CHECK(c.upper.maxCoeff() == 2.0);
  CHECK(c.lower.minCoeff() == 0.0);
}

TEST_CASE("vacuum pair pins Y00") {
  // The (0, 0) intensity pair has P_00 = 1 and no tail.
  const auto obs = observed_statistics(config_at({0.0, 0.01}, 0.3, 10.0));
  const auto sol = lp::solve(build_yield_lp(obs, TruncationPolicy{}, 0, 0));
  REQUIRE(sol.status == lp::Status::Optimal);
  const double q00 = obs.gain_zz(0, 0);
  CHECK(q00 > 0.0);
  CHECK(std::abs(sol.value - q00) <= 1e-12 * q00);
}

TEST_CASE("five intensities at 10 km against the oracle") {
  const auto cfg = config_at(kFiveDecoys, 0.3, 10.0);
  const auto table = build_fock_yield_table(cfg, 7);
  const auto report = estimate_bounds(to_intervals(observed_statistics(cfg)), TruncationPolicy{});
  CHECK(report.all_optimal());
  CHECK(report.diagnostics.size() == 17);

  CHECK(report.y11_lower <= table.y11_zz());
  CHECK(report.y11_lower >= 0.90 * table.y11_zz());

  CHECK(report.g11_lower <= table.g11());
  CHECK(report.g11_lower >= 2.0);
  CHECK(report.g11_lower <= kTsirelson + 1e-6);

  for (const auto& t : report.terms) {
    INFO(to_string(t.tag));
    CHECK_FALSE(t.degenerate);
    CHECK(t.denominator.high <= 4.0);
    const double truth = oracle_ratio(table, t.tag);
    const auto lower = bound_chsh_term(t.tag, t.numerator, t.denominator, RatioSide::Lower);
    const auto upper = bound_chsh_term(t.tag, t.numerator, t.denominator, RatioSide::Upper);
    CHECK(lower.ratio <= truth);
    CHECK(truth <= upper.ratio);
    CHECK(t.numerator.contains(table.corr_sum(1, 1, t.tag)));
    CHECK(t.denominator.contains(table.yield_sum(1, 1, t.tag)));
  }
}

TEST_CASE("denominator maximum never exceeds four") {
  const auto obs = observed_statistics(config_at({0.0, 0.01}, 0.5, 60.0));
  for (auto tag : kChshTags) {
    const auto sol = lp::solve(build_chsh_lp(obs, TruncationPolicy{}, tag, ChshTarget::Denominator,
                                             lp::Direction::Maximize));
    REQUIRE(sol.status == lp::Status::Optimal);
    CHECK(sol.value <= 4.0 + 1e-12);
  }
}

TEST_CASE("dark-count data gives a numerator range symmetric about zero") {
  // At 2000 km the transmitted light is negligible and only the bit-independent
  // dark counts remain.
  const auto obs = observed_statistics(config_at(kFiveDecoys, 0.3, 2000.0));
  for (auto tag : kChshTags) {
    INFO(to_string(tag));
    const auto lo = lp::solve(build_chsh_lp(obs, TruncationPolicy{}, tag, ChshTarget::Numerator, lp::Direction::Minimize));
    const auto hi = lp::solve(build_chsh_lp(obs, TruncationPolicy{}, tag, ChshTarget::Numerator, lp::Direction::Maximize));
    const auto den = lp::solve(build_chsh_lp(obs, TruncationPolicy{}, tag, ChshTarget::Denominator, lp::Direction::Maximize));
    REQUIRE(lo.status == lp::Status::Optimal);
    REQUIRE(hi.status == lp::Status::Optimal);
    REQUIRE(den.status == lp::Status::Optimal);
    CHECK(hi.value >= 0.0);
    CHECK(std::abs(lo.value + hi.value) <= 1e-9 * den.value);
  }
}

TEST_CASE("ratio rule") {
  CHECK(bound_chsh_term(BasisTag::QT, {0.5, 0.7}, {0.8, 1.0}, RatioSide::Upper).ratio == doctest::Approx(0.875));
  CHECK(bound_chsh_term(BasisTag::QT, {-0.7, -0.5}, {0.8, 1.0}, RatioSide::Upper).ratio == doctest::Approx(-0.5));
  const auto degenerate = bound_chsh_term(BasisTag::QS, {-0.2, 0.4}, {0.0, 0.3}, RatioSide::Lower);
  CHECK(degenerate.ratio == -1.0);
  CHECK(degenerate.degenerate);
  CHECK(bound_chsh_term(BasisTag::QT, {-0.2, 0.4}, {0.0, 0.3}, RatioSide::Upper).ratio == 1.0);

  CHECK(bound_chsh_term(BasisTag::QS, {0.5, 0.7}, {0.8, 1.0}, RatioSide::Lower).ratio == doctest::Approx(0.5));
  CHECK(bound_chsh_term(BasisTag::QS, {-0.7, -0.5}, {0.8, 1.0}, RatioSide::Lower).ratio == doctest::Approx(-0.875));
  // Loose numerators are clamped.
  CHECK(bound_chsh_term(BasisTag::QS, {0.5, 3.0}, {0.1, 1.0}, RatioSide::Upper).ratio == 1.0);
  CHECK_THROWS_AS(bound_chsh_term(BasisTag::QS, {0.0, 0.1}, {-0.1, 0.3}, RatioSide::Lower), std::logic_error);
}

TEST_CASE("g11 composition") {
  const double r = 1.0 / std::numbers::sqrt2;
  std::array<ChshTermBound, 4> ideal = {term(BasisTag::QS, r, RatioSide::Lower), term(BasisTag::RS, r, RatioSide::Lower),
                                        term(BasisTag::RT, r, RatioSide::Lower),
                                        term(BasisTag::QT, -r, RatioSide::Upper)};
  CHECK(lower_bound_g11(ideal) == doctest::Approx(kTsirelson).epsilon(1e-14));

  std::array<ChshTermBound, 4> trivial = {
      term(BasisTag::QS, -1, RatioSide::Lower), term(BasisTag::RS, -1, RatioSide::Lower),
      term(BasisTag::RT, -1, RatioSide::Lower), term(BasisTag::QT, 1, RatioSide::Upper)};
  CHECK(lower_bound_g11(trivial) == -4.0);

  auto wrong = ideal;
  wrong[3].side = RatioSide::Lower;
  CHECK_THROWS_AS(lower_bound_g11(wrong), std::invalid_argument);
  wrong = ideal;
  std::swap(wrong[0], wrong[1]);
  CHECK_THROWS_AS(lower_bound_g11(wrong), std::invalid_argument);
}

TEST_CASE("singlet correlators compose to the Tsirelson value") {
  SystemParams ideal;
  ideal.dark_count = 0.0;
  ideal.det_efficiency = 1.0;
  const auto table = build_fock_yield_table(symmetric_config(kFiveDecoys, 0.3, ideal), 2);
  std::array<ChshTermBound, 4> terms;
  for (std::size_t t = 0; t < 4; ++t) {
    const auto tag = kChshTags[t];
    terms[t] = term(tag, table.correlator(1, 1, tag), tag == BasisTag::QT ? RatioSide::Upper : RatioSide::Lower);
  }
  CHECK(std::abs(lower_bound_g11(terms) - kTsirelson) < 1e-12);
}

TEST_CASE("finite-size widening") {
  ObservedStatistics obs({Intensity(0.0), Intensity(0.1)}, {Intensity(0.0), Intensity(0.1)});
  obs.yields(1, 1, BasisTag::ZZ) = {1e-6, 1e-6, 1e-6, 1e-6};
  obs.yields(1, 1, BasisTag::QS) = {3e-6, 1e-6, 0.0, 2e-6};

  SUBCASE("point limit") {
    const auto iv = to_intervals(obs);
    CHECK_FALSE(iv.pulses.has_value());
    const auto& s = iv.at(1, 1, BasisTag::ZZ);
    CHECK(s.gain.low == 1e-6);
    CHECK(s.gain.high == 1e-6);
    CHECK(iv.at(1, 1, BasisTag::QS).corr_sum.width() == 0.0);
    CHECK(iv.at(1, 1, BasisTag::QS).corr_sum.low == doctest::Approx(4e-6));
  }

  SUBCASE("1e10 pulses") {
    const auto iv = apply_finite_size(obs, 1e10);
    REQUIRE(iv.pulses.has_value());
    CHECK(*iv.pulses == 1e10);
    const double half = 5.0 * std::sqrt(1e-6 * (1.0 - 1e-6) / 1e10);
    CHECK(half == doctest::Approx(1.58e-8).epsilon(1e-3));
    const auto& g = iv.at(1, 1, BasisTag::ZZ).gain;
    CHECK(g.low == doctest::Approx(9.842e-7).epsilon(1e-4));
    CHECK(g.high == doctest::Approx(1.0158e-6).epsilon(1e-4));
    CHECK(g.low == doctest::Approx(1e-6 - half).epsilon(1e-14));

    // Per-component widening before the signed sum.
    const auto& qs = iv.at(1, 1, BasisTag::QS);
    double width = 0.0;
    for (double q : {3e-6, 1e-6, 0.0, 2e-6}) width += 2.0 * 5.0 * std::sqrt(q * (1.0 - q) / 1e10);
    CHECK(qs.corr_sum.width() == doctest::Approx(width).epsilon(1e-12));
    CHECK(qs.yield_sum.width() == doctest::Approx(width).epsilon(1e-12));
    CHECK(qs.corr_sum.contains(4e-6));
  }

  SUBCASE("zero probabilities stay points and are counted") {
    const auto iv = apply_finite_size(obs, 1e10);
    const auto& vac = iv.at(0, 0, BasisTag::ZZ);
    CHECK(vac.gain.low == 0.0);
    CHECK(vac.gain.high == 0.0);
    CHECK(iv.zero_width_count > 0);
  }

  SUBCASE("clipping to the unit interval") {
    ObservedStatistics big({Intensity(0.0)}, {Intensity(0.0)});
    big.yields(0, 0, BasisTag::XX) = {0.999999, 0.999999, 0.999999, 0.999999};
    const auto iv = apply_finite_size(big, 100.0);
    CHECK(iv.at(0, 0, BasisTag::XX).gain.high == 1.0);
  }

  CHECK_THROWS_AS(apply_finite_size(obs, 0.0), std::domain_error);
  CHECK_THROWS_AS(apply_finite_size(obs, -5.0), std::domain_error);
}

TEST_CASE("phase-error bound for the standard protocol") {
  const auto cfg = config_at({0.0, 0.01, 0.02}, 0.3, 20.0);
  const auto table = build_fock_yield_table(cfg, 7);
  std::vector<LpDiagnostic> diag;
  const auto e = upper_bound_e11(to_intervals(observed_statistics(cfg)), TruncationPolicy{}, &diag);
  CHECK(diag.size() == 2);
  CHECK(e.y11_xx_lower <= 0.25 * table.yield_sum(1, 1, BasisTag::XX));
  CHECK(e.y11_xx_lower > 0.0);
  CHECK(e.e11_upper >= table.e11_xx());
  CHECK(e.e11_upper <= 0.5);
  CHECK(e.e11_upper < 0.05);
}

TEST_CASE("soundness over distance and intensity sets") {
  for (const auto& decoys : kDecoySets) {
    for (double signal : {0.2, 0.5}) {
      for (int km = 0; km <= 120; km += 10) {
        const auto cfg = config_at(decoys, signal, km);
        const auto table = build_fock_yield_table(cfg, 7);
        const auto report = estimate_bounds(to_intervals(observed_statistics(cfg)), TruncationPolicy{});
        INFO("decoys " << decoys.size() << " signal " << signal << " km " << km);
        CHECK(report.all_optimal());
        CHECK(report.y11_lower >= 0.0);
        CHECK(report.y11_lower <= table.y11_zz());
        CHECK(report.g11_lower <= table.g11());
        CHECK(report.g11_lower <= kTsirelson + 1e-6);
      }
    }
  }
}

TEST_CASE("more intensities never loosen the bounds") {
  const TruncationPolicy policy;
  for (int km : {0, 50, 100}) {
    INFO("km " << km);
    double prev_y = -kInf;
    double prev_g = -kInf;
    for (const auto& decoys : kDecoySets) {
      const auto report = estimate_bounds(to_intervals(observed_statistics(config_at(decoys, 0.4, km))), policy);
      CHECK(report.y11_lower >= prev_y - 1e-10);
      CHECK(report.g11_lower >= prev_g - 1e-10);
      prev_y = report.y11_lower;
      prev_g = report.g11_lower;
    }

    // One side only.
    auto lopsided = config_at({0.0, 0.01, 0.02}, 0.4, km);
    const auto base = estimate_bounds(to_intervals(observed_statistics(lopsided)), policy);
    lopsided.alice.decoys.push_back(Intensity(0.03));
    const auto more = estimate_bounds(to_intervals(observed_statistics(lopsided)), policy);
    CHECK(more.y11_lower >= base.y11_lower - 1e-10);
    CHECK(more.g11_lower >= base.g11_lower - 1e-10);
  }
}

TEST_CASE("bounds tighten with more pulses") {
  const auto obs = observed_statistics(config_at(kFiveDecoys, 0.3, 40.0));
  const TruncationPolicy policy;
  double prev_y = -kInf;
  double prev_g = -kInf;
  for (double n : {1e11, 1e12, 1e13, 1e14, 1e15, kInf}) {
    INFO("N " << n);
    const auto iv = apply_finite_size(obs, n);
    const auto report = estimate_bounds(iv, policy);
    CHECK(report.y11_lower >= prev_y - 1e-10);
    CHECK(report.g11_lower >= prev_g - 1e-10);
    prev_y = report.y11_lower;
    prev_g = report.g11_lower;

    for (std::size_t k = 0; k < obs.alice().size(); ++k) {
      for (std::size_t l = 0; l < obs.bob().size(); ++l) {
        for (auto tag : kAllTags) {
          const auto& s = iv.at(k, l, tag);
          CHECK(s.gain.contains(obs.gain(k, l, tag)));
          CHECK(s.error_gain.contains(obs.error_gain(k, l, tag)));
          CHECK(s.yield_sum.contains(obs.yield_sum(k, l, tag)));
          CHECK(s.corr_sum.contains(obs.corr_sum(k, l, tag)));
          CHECK(std::abs(s.corr_sum.low) <= s.yield_sum.high);
          CHECK(std::abs(s.corr_sum.high) <= s.yield_sum.high);
        }
      }
    }
  }
}

TEST_CASE("raising the cutoff barely moves the yield bound") {
  for (const auto& decoys : kDecoySets) {
    for (double signal : {0.1, 0.3, 0.6}) {
      const auto iv = to_intervals(observed_statistics(config_at(decoys, signal, 30.0)));
      const double y7 = lower_bound_y11(iv, TruncationPolicy{7});
      const double y9 = lower_bound_y11(iv, TruncationPolicy{9});
      INFO("decoys " << decoys.size() << " signal " << signal);
      if (decoys.size() >= 3) {
        CHECK(std::abs(y9 - y7) < 1e-8);
      } else {
        // With three intensities the signal pair's tail slack is felt directly.
        CHECK(std::abs(y9 - y7) < 1e-3 * y9);
      }
    }
  }
}

TEST_CASE("report text lists every program") {
  const auto report =
      estimate_bounds(to_intervals(observed_statistics(config_at({0.0, 0.01}, 0.3, 10.0))), TruncationPolicy{});
  std::ostringstream os;
  report.print(os);
  const auto text = os.str();
  CHECK(text.find("y11_lower") != std::string::npos);
  CHECK(text.find("max denominator QT") != std::string::npos);
  CHECK(text.find("optimal") != std::string::npos);
}
