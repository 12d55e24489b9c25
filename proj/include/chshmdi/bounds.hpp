#ifndef CHSHMDI_BOUNDS_HPP
#define CHSHMDI_BOUNDS_HPP

// Decoy-state estimation: turn observed gains and correlator sums into linear
// programs over the per-photon-number unknowns, and combine the solutions into
// lower bounds on the single-photon yield and CHSH value.

#include "chshmdi/lp.hpp"
#include "chshmdi/model.hpp"
#include "chshmdi/optics.hpp"

#include <array>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace chshmdi {

struct Interval {
  double low = 0.0;
  double high = 0.0;

  static Interval point(double x) { return {x, x}; }
  bool contains(double x) const { return low <= x && x <= high; }
  double width() const { return high - low; }
};

struct TruncationPolicy {
  int cutoff = 7;

  void validate() const;
  /// Probability mass of the photon-number pairs beyond the cutoff.
  double slack(Intensity a, Intensity b) const { return poisson_tail(a, b, cutoff); }
  int side() const { return cutoff + 1; }
  /// Variable index of Y_mn.
  Eigen::Index var(int m, int n) const { return m * side() + n; }
};

/// Observed quantities as intervals: points in the asymptotic case, widened by
/// statistical fluctuation for finite pulse counts.
class IntervalObservation {
 public:
  struct Setting {
    Interval yield_sum;   // sum_ij Y^{ij}
    Interval corr_sum;    // sum_ij a_ij Y^{ij}
    Interval gain;        // Q = yield_sum / 4
    Interval error_gain;  // Q E = (Y^{00} + Y^{11}) / 4
  };

  IntervalObservation(std::vector<Intensity> alice, std::vector<Intensity> bob);

  const std::vector<Intensity>& alice() const { return alice_; }
  const std::vector<Intensity>& bob() const { return bob_; }

  Setting& at(std::size_t k, std::size_t l, BasisTag tag);
  const Setting& at(std::size_t k, std::size_t l, BasisTag tag) const;

  /// Pulse count behind the widening; empty in the asymptotic case.
  std::optional<double> pulses;
  /// Number of observed probabilities that were exactly zero and hence got a
  /// zero-width interval.
  int zero_width_count = 0;

 private:
  std::vector<Intensity> alice_;
  std::vector<Intensity> bob_;
  std::vector<std::array<Setting, kNumTags>> data_;
};

IntervalObservation to_intervals(const ObservedStatistics& observed);

/// Number of standard deviations used for the fluctuation intervals.
inline constexpr double kFluctuationSigmas = 5.0;

/// Widens every observed probability q to q -/+ 5 sqrt(q (1 - q) / N), clipped to
/// [0, 1]. Correlator sums are widened per bit pair before the signed sum.
IntervalObservation apply_finite_size(const ObservedStatistics& observed, double pulses);

enum class ChshTarget { Numerator, Denominator };
enum class RatioSide { Lower, Upper };

/// Gain constraints for one basis combination: variables Y_mn in [0, 1],
/// per intensity pair  Q_lo - tail <= sum_{m,n<=M} P_mn Y_mn <= Q_hi.
/// `error_gain` selects the error-weighted gains (Q E) instead of Q.
lp::LinearProgram<double> build_gain_lp(const IntervalObservation& observed, const TruncationPolicy& policy,
                                        BasisTag tag, bool error_gain, int target_m, int target_n,
                                        lp::Direction direction);

/// Minimizes Y_11^{ZZ} (or another Y_mn^{ZZ} when asked) subject to the ZZ gains.
lp::LinearProgram<double> build_yield_lp(const IntervalObservation& observed, const TruncationPolicy& policy,
                                         int target_m = 1, int target_n = 1);
lp::LinearProgram<double> build_yield_lp(const ObservedStatistics& observed, const TruncationPolicy& policy,
                                         int target_m = 1, int target_n = 1);

/// The four per-bit yields Y_mn^{ij,w} in [0, 1] enter only through the sums
/// with equal bits (a_ij = +1) and with opposite bits (a_ij = -1), so each
/// (m, n) carries two variables in [0, 2]: index 2 var(m, n) for Y^{00} + Y^{11}
/// and 2 var(m, n) + 1 for Y^{01} + Y^{10}. Per intensity pair the truncated
/// yield-sum and correlator-sum equations become ranged rows with slack
/// [0, 4 tail] and [-2 tail, 2 tail].
lp::LinearProgram<double> build_chsh_lp(const IntervalObservation& observed, const TruncationPolicy& policy,
                                        BasisTag tag, ChshTarget target, lp::Direction direction);
lp::LinearProgram<double> build_chsh_lp(const ObservedStatistics& observed, const TruncationPolicy& policy,
                                        BasisTag tag, ChshTarget target, lp::Direction direction);

/// Objective row for the (1,1) numerator or denominator of a CHSH term.
Eigen::VectorXd chsh_objective(const TruncationPolicy& policy, ChshTarget target);

struct ChshTermBound {
  BasisTag tag = BasisTag::QS;
  Interval numerator;
  Interval denominator;
  RatioSide side = RatioSide::Lower;
  double ratio = 0.0;
  /// True when the denominator lower bound vanished and the ratio fell back to -/+1.
  bool degenerate = false;
};

inline constexpr double kDenominatorEpsilon = 1e-12;

/// Sign-aware interval division, clamped to [-1, 1].
ChshTermBound bound_chsh_term(BasisTag tag, Interval numerator, Interval denominator, RatioSide want);

/// g = C^QS + C^RS + C^RT - C^QT from lower bounds on the first three and an
/// upper bound on QT.
double lower_bound_g11(const std::array<ChshTermBound, 4>& terms);

struct LpDiagnostic {
  std::string name;
  lp::Status status = lp::Status::Infeasible;
  double value = 0.0;
  int iterations = 0;
};

struct BoundReport {
  double y11_lower = 0.0;
  double g11_lower = -4.0;
  std::array<ChshTermBound, 4> terms;
  std::vector<LpDiagnostic> diagnostics;

  bool all_optimal() const;
  void print(std::ostream& os) const;
};

/// Lower bound on Y_11^{ZZ}; 0 when the program is infeasible.
double lower_bound_y11(const IntervalObservation& observed, const TruncationPolicy& policy,
                       std::vector<LpDiagnostic>* diagnostics = nullptr);

/// Solves the four programs (numerator and denominator, both directions) of one
/// CHSH term and applies the ratio rule.
ChshTermBound estimate_chsh_term(const IntervalObservation& observed, const TruncationPolicy& policy,
                                 BasisTag tag, RatioSide want,
                                 std::vector<LpDiagnostic>* diagnostics = nullptr);

BoundReport estimate_bounds(const IntervalObservation& observed, const TruncationPolicy& policy);

/// Upper bound on the single-photon X-basis error rate e_11 used by the
/// standard MDI baseline, together with the Y_11^{XX} lower bound it divides by.
struct PhaseErrorBound {
  double y11_xx_lower = 0.0;
  double error_yield_upper = 1.0;
  double e11_upper = 0.5;
};

PhaseErrorBound upper_bound_e11(const IntervalObservation& observed, const TruncationPolicy& policy,
                                std::vector<LpDiagnostic>* diagnostics = nullptr);

}  // namespace chshmdi

#endif  // CHSHMDI_BOUNDS_HPP
