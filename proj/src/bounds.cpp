#include "chshmdi/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace chshmdi {

namespace {

using lp::Direction;
using lp::LinearProgram;
using lp::Relation;

constexpr int kMinIntensities = 3;

void require_intensities(const IntervalObservation& observed) {
  if (observed.alice().size() < kMinIntensities || observed.bob().size() < kMinIntensities) {
    std::ostringstream msg;
    msg << "decoy estimation needs at least " << kMinIntensities
        << " distinct intensities per side (decoys plus signal), got " << observed.alice().size()
        << " and " << observed.bob().size();
    throw ConfigError(msg.str());
  }
}

// P_m(mu) for m = 0..cutoff.
Eigen::VectorXd pmf_vector(Intensity mu, int cutoff) {
  Eigen::VectorXd p(cutoff + 1);
  for (int m = 0; m <= cutoff; ++m) p(m) = poisson_pmf(mu, m);
  return p;
}

double row_scale(double magnitude) { return magnitude > 0.0 ? 1.0 / magnitude : 1.0; }

Interval widen(double q, double pulses, int& zero_count) {
  if (q == 0.0) ++zero_count;
  if (!std::isfinite(pulses)) return Interval::point(q);
  const double half = kFluctuationSigmas * std::sqrt(q * (1.0 - q) / pulses);
  return {std::max(0.0, q - half), std::min(1.0, q + half)};
}

std::string label(std::string_view what, BasisTag tag) {
  std::string s(what);
  s += ' ';
  s += to_string(tag);
  return s;
}

}  // namespace

void TruncationPolicy::validate() const {
  if (cutoff < 2) throw ConfigError("photon-number cutoff must be at least 2");
  if (cutoff > kMaxFockPhotons) throw ConfigError("photon-number cutoff too large");
}

IntervalObservation::IntervalObservation(std::vector<Intensity> alice, std::vector<Intensity> bob)
    : alice_(std::move(alice)), bob_(std::move(bob)), data_(alice_.size() * bob_.size()) {}

IntervalObservation::Setting& IntervalObservation::at(std::size_t k, std::size_t l, BasisTag tag) {
  return data_.at(k * bob_.size() + l)[index_of(tag)];
}

const IntervalObservation::Setting& IntervalObservation::at(std::size_t k, std::size_t l,
                                                            BasisTag tag) const {
  return data_.at(k * bob_.size() + l)[index_of(tag)];
}

IntervalObservation to_intervals(const ObservedStatistics& observed) {
  return apply_finite_size(observed, std::numeric_limits<double>::infinity());
}

IntervalObservation apply_finite_size(const ObservedStatistics& observed, double pulses) {
  if (!(pulses > 0.0)) throw std::domain_error("pulse count must be positive");
  IntervalObservation out(observed.alice(), observed.bob());
  if (std::isfinite(pulses)) out.pulses = pulses;
  int zeros = 0;
  for (std::size_t k = 0; k < observed.alice().size(); ++k) {
    for (std::size_t l = 0; l < observed.bob().size(); ++l) {
      for (auto tag : kAllTags) {
        const auto& y = observed.yields(k, l, tag);
        auto& s = out.at(k, l, tag);
        s.yield_sum = {0.0, 0.0};
        s.corr_sum = {0.0, 0.0};
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            const Interval w = widen(y[static_cast<std::size_t>(2 * i + j)], pulses, zeros);
            s.yield_sum.low += w.low;
            s.yield_sum.high += w.high;
            if (correlator_sign(i, j) > 0) {
              s.corr_sum.low += w.low;
              s.corr_sum.high += w.high;
            } else {
              s.corr_sum.low -= w.high;
              s.corr_sum.high -= w.low;
            }
          }
        }
        s.gain = widen(observed.gain(k, l, tag), pulses, zeros);
        s.error_gain = widen(observed.error_gain(k, l, tag), pulses, zeros);
      }
    }
  }
  out.zero_width_count = zeros;
  return out;
}

LinearProgram<double> build_gain_lp(const IntervalObservation& observed, const TruncationPolicy& policy,
                                    BasisTag tag, bool error_gain, int target_m, int target_n,
                                    Direction direction) {
  policy.validate();
  require_intensities(observed);
  if (target_m < 0 || target_n < 0 || target_m > policy.cutoff || target_n > policy.cutoff) {
    throw std::out_of_range("target photon numbers outside the truncation");
  }
  const int M = policy.cutoff;
  const auto na = observed.alice().size();
  const auto nb = observed.bob().size();
  const Eigen::Index vars = policy.side() * policy.side();
  LinearProgram<double> lp(vars, static_cast<Eigen::Index>(2 * na * nb));
  lp.upper.setOnes();
  lp.objective(policy.var(target_m, target_n)) = 1.0;
  lp.direction = direction;

  Eigen::Index row = 0;
  for (std::size_t k = 0; k < na; ++k) {
    const Eigen::VectorXd pa = pmf_vector(observed.alice()[k], M);
    for (std::size_t l = 0; l < nb; ++l) {
      const Eigen::VectorXd pb = pmf_vector(observed.bob()[l], M);
      const auto& s = observed.at(k, l, tag);
      const Interval q = error_gain ? s.error_gain : s.gain;
      const double tail = policy.slack(observed.alice()[k], observed.bob()[l]);
      const double scale = row_scale(q.high);
      Eigen::RowVectorXd coeffs(vars);
      for (int m = 0; m <= M; ++m) {
        for (int n = 0; n <= M; ++n) coeffs(policy.var(m, n)) = scale * pa(m) * pb(n);
      }
      lp.rows.row(row) = coeffs;
      lp.relations[static_cast<std::size_t>(row)] = Relation::LessEqual;
      lp.rhs(row++) = scale * q.high;
      lp.rows.row(row) = coeffs;
      lp.relations[static_cast<std::size_t>(row)] = Relation::GreaterEqual;
      lp.rhs(row++) = scale * (q.low - tail);
    }
  }
  return lp;
}

LinearProgram<double> build_yield_lp(const IntervalObservation& observed, const TruncationPolicy& policy,
                                     int target_m, int target_n) {
  return build_gain_lp(observed, policy, BasisTag::ZZ, false, target_m, target_n, Direction::Minimize);
}

LinearProgram<double> build_yield_lp(const ObservedStatistics& observed, const TruncationPolicy& policy,
                                     int target_m, int target_n) {
  return build_yield_lp(to_intervals(observed), policy, target_m, target_n);
}

Eigen::VectorXd chsh_objective(const TruncationPolicy& policy, ChshTarget target) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * policy.side() * policy.side());
  const Eigen::Index base = 2 * policy.var(1, 1);
  c(base) = 1.0;
  c(base + 1) = target == ChshTarget::Numerator ? -1.0 : 1.0;
  return c;
}

LinearProgram<double> build_chsh_lp(const IntervalObservation& observed, const TruncationPolicy& policy,
                                    BasisTag tag, ChshTarget target, Direction direction) {
  policy.validate();
  require_intensities(observed);
  const int M = policy.cutoff;
  const auto na = observed.alice().size();
  const auto nb = observed.bob().size();
  const Eigen::Index vars = 2 * policy.side() * policy.side();
  LinearProgram<double> lp(vars, static_cast<Eigen::Index>(4 * na * nb));
  lp.upper.setConstant(2.0);
  lp.objective = chsh_objective(policy, target);
  lp.direction = direction;

  Eigen::Index row = 0;
  for (std::size_t k = 0; k < na; ++k) {
    const Eigen::VectorXd pa = pmf_vector(observed.alice()[k], M);
    for (std::size_t l = 0; l < nb; ++l) {
      const Eigen::VectorXd pb = pmf_vector(observed.bob()[l], M);
      const auto& s = observed.at(k, l, tag);
      const double tail = policy.slack(observed.alice()[k], observed.bob()[l]);
      const double scale = row_scale(s.yield_sum.high);
      Eigen::RowVectorXd sum_row(vars);
      Eigen::RowVectorXd corr_row(vars);
      for (int m = 0; m <= M; ++m) {
        for (int n = 0; n <= M; ++n) {
          const double p = scale * pa(m) * pb(n);
          const Eigen::Index v = 2 * policy.var(m, n);
          sum_row(v) = p;
          sum_row(v + 1) = p;
          corr_row(v) = p;
          corr_row(v + 1) = -p;
        }
      }
      auto add = [&](const Eigen::RowVectorXd& r, Relation rel, double b) {
        lp.rows.row(row) = r;
        lp.relations[static_cast<std::size_t>(row)] = rel;
        lp.rhs(row++) = scale * b;
      };
      add(sum_row, Relation::LessEqual, s.yield_sum.high);
      add(sum_row, Relation::GreaterEqual, s.yield_sum.low - 4.0 * tail);
      add(corr_row, Relation::LessEqual, s.corr_sum.high + 2.0 * tail);
      add(corr_row, Relation::GreaterEqual, s.corr_sum.low - 2.0 * tail);
    }
  }
  return lp;
}

LinearProgram<double> build_chsh_lp(const ObservedStatistics& observed, const TruncationPolicy& policy,
                                    BasisTag tag, ChshTarget target, Direction direction) {
  return build_chsh_lp(to_intervals(observed), policy, tag, target, direction);
}

ChshTermBound bound_chsh_term(BasisTag tag, Interval numerator, Interval denominator, RatioSide want) {
  if (denominator.low < 0.0 || denominator.high < denominator.low) {
    throw std::logic_error("CHSH denominator interval must be non-negative and ordered");
  }
  ChshTermBound b{tag, numerator, denominator, want, 0.0, false};
  if (denominator.low <= kDenominatorEpsilon) {
    b.degenerate = true;
    b.ratio = want == RatioSide::Upper ? 1.0 : -1.0;
    return b;
  }
  if (want == RatioSide::Upper) {
    b.ratio = numerator.high / (numerator.high >= 0.0 ? denominator.low : denominator.high);
  } else {
    b.ratio = numerator.low / (numerator.low >= 0.0 ? denominator.high : denominator.low);
  }
  b.ratio = std::clamp(b.ratio, -1.0, 1.0);
  return b;
}

double lower_bound_g11(const std::array<ChshTermBound, 4>& terms) {
  double g = 0.0;
  for (std::size_t t = 0; t < 4; ++t) {
    const BasisTag expected = kChshTags[t];
    const RatioSide side = expected == BasisTag::QT ? RatioSide::Upper : RatioSide::Lower;
    if (terms[t].tag != expected || terms[t].side != side) {
      throw std::invalid_argument("g11 needs lower bounds for QS, RS, RT and an upper bound for QT, in order");
    }
    g += expected == BasisTag::QT ? -terms[t].ratio : terms[t].ratio;
  }
  return g;
}

bool BoundReport::all_optimal() const {
  return std::all_of(diagnostics.begin(), diagnostics.end(),
                     [](const LpDiagnostic& d) { return d.status == lp::Status::Optimal; });
}

void BoundReport::print(std::ostream& os) const {
  const auto flags = os.flags();
  os << std::scientific << std::setprecision(10);
  os << "y11_lower = " << y11_lower << "\n";
  os << "g11_lower = " << g11_lower << "\n";
  for (const auto& t : terms) {
    os << "  C11^" << to_string(t.tag) << (t.side == RatioSide::Upper ? " upper" : " lower") << " = " << t.ratio
       << "  numerator [" << t.numerator.low << ", " << t.numerator.high << "]  denominator ["
       << t.denominator.low << ", " << t.denominator.high << "]" << (t.degenerate ? "  (degenerate)" : "")
       << "\n";
  }
  for (const auto& d : diagnostics) {
    os << "  lp " << std::left << std::setw(22) << d.name << std::right << " " << lp::to_string(d.status)
       << "  value " << d.value << "  iterations " << d.iterations << "\n";
  }
  os.flags(flags);
}

double lower_bound_y11(const IntervalObservation& observed, const TruncationPolicy& policy,
                       std::vector<LpDiagnostic>* diagnostics) {
  const auto program = build_yield_lp(observed, policy);
  const auto sol = lp::solve_robust(program);
  if (diagnostics) diagnostics->push_back({"min Y11 ZZ", sol.status, sol.value, sol.iterations});
  if (sol.status != lp::Status::Optimal) return 0.0;
  return std::clamp(sol.value, 0.0, 1.0);
}

ChshTermBound estimate_chsh_term(const IntervalObservation& observed, const TruncationPolicy& policy,
                                 BasisTag tag, RatioSide want, std::vector<LpDiagnostic>* diagnostics) {
  const auto program = build_chsh_lp(observed, policy, tag, ChshTarget::Numerator, Direction::Minimize);
  const Eigen::VectorXd num = chsh_objective(policy, ChshTarget::Numerator);
  const Eigen::VectorXd den = chsh_objective(policy, ChshTarget::Denominator);

  // The four programs share one feasible region, so each starts from the
  // previous optimal basis.
  auto solve_all = [&]<typename Scalar>(const lp::LinearProgram<Scalar>& p) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    lp::SimplexSolver<Scalar> solver(p);
    const Vec c_num = num.cast<Scalar>();
    const Vec c_den = den.cast<Scalar>();
    return std::array{lp::cast<double>(solver.solve(c_num, Direction::Minimize)),
                      lp::cast<double>(solver.solve(c_num, Direction::Maximize)),
                      lp::cast<double>(solver.solve(c_den, Direction::Minimize)),
                      lp::cast<double>(solver.solve(c_den, Direction::Maximize))};
  };
  std::array<lp::LpSolution<double>, 4> sols;
  try {
    sols = solve_all(program);
  } catch (const lp::NumericalError&) {
    sols = solve_all(lp::cast<long double>(program));
  }

  constexpr std::array<std::string_view, 4> kNames{"min numerator", "max numerator", "min denominator",
                                                   "max denominator"};
  constexpr std::array<double, 4> kFallback{-2.0, 2.0, 0.0, 4.0};
  std::array<double, 4> value{};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& sol = sols[k];
    if (diagnostics) diagnostics->push_back({label(kNames[k], tag), sol.status, sol.value, sol.iterations});
    value[k] = sol.status == lp::Status::Optimal ? sol.value : kFallback[k];
  }
  Interval numerator{value[0], value[1]};
  Interval denominator{value[2], value[3]};
  // Round-off can push an exact zero slightly negative.
  denominator.low = std::max(0.0, denominator.low);
  denominator.high = std::max(denominator.low, denominator.high);
  return bound_chsh_term(tag, numerator, denominator, want);
}

BoundReport estimate_bounds(const IntervalObservation& observed, const TruncationPolicy& policy) {
  BoundReport report;
  report.y11_lower = lower_bound_y11(observed, policy, &report.diagnostics);
  for (std::size_t t = 0; t < 4; ++t) {
    const BasisTag tag = kChshTags[t];
    const RatioSide side = tag == BasisTag::QT ? RatioSide::Upper : RatioSide::Lower;
    report.terms[t] = estimate_chsh_term(observed, policy, tag, side, &report.diagnostics);
  }
  report.g11_lower = lower_bound_g11(report.terms);
  return report;
}

PhaseErrorBound upper_bound_e11(const IntervalObservation& observed, const TruncationPolicy& policy,
                                std::vector<LpDiagnostic>* diagnostics) {
  PhaseErrorBound out;
  const auto yield_sol =
      lp::solve_robust(build_gain_lp(observed, policy, BasisTag::XX, false, 1, 1, Direction::Minimize));
  if (diagnostics) diagnostics->push_back({"min Y11 XX", yield_sol.status, yield_sol.value, yield_sol.iterations});
  const auto error_sol =
      lp::solve_robust(build_gain_lp(observed, policy, BasisTag::XX, true, 1, 1, Direction::Maximize));
  if (diagnostics) {
    diagnostics->push_back({"max e11*Y11 XX", error_sol.status, error_sol.value, error_sol.iterations});
  }
  if (yield_sol.status != lp::Status::Optimal || error_sol.status != lp::Status::Optimal) return out;
  out.y11_xx_lower = std::max(0.0, yield_sol.value);
  out.error_yield_upper = std::clamp(error_sol.value, 0.0, 1.0);
  if (out.y11_xx_lower > kDenominatorEpsilon) {
    out.e11_upper = std::min(0.5, out.error_yield_upper / out.y11_xx_lower);
  }
  return out;
}

}  // namespace chshmdi
