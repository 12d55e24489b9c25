#ifndef CHSHMDI_LP_HPP
#define CHSHMDI_LP_HPP

// Dense bounded-variable primal simplex for small linear programs.
//
// Variables carry their own [lower, upper] box (either side may be infinite).
// Inequality rows get a slack column; rows that cannot be covered by their
// slack at the starting point get an artificial, driven out in phase one.
// The problem is equilibrated (column then row scaling) before solving and
// the answer is mapped back to the caller's units.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace chshmdi::lp {

enum class Relation { Equal, LessEqual, GreaterEqual };
enum class Direction { Minimize, Maximize };
enum class Status { Optimal, Infeasible, Unbounded };
/// Bland: first improving column (smallest index), never cycles.
/// Dantzig: largest reduced cost, switching to Bland's rule for the rest of a
/// run of degenerate pivots so it cannot cycle either.
enum class Pricing { Bland, Dantzig };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "?";
}

/// Raised when round-off leaves the simplex without a usable basis or it fails
/// to converge; re-solving in a wider scalar type usually succeeds.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
struct Tolerances {
  static constexpr Scalar feasibility = Scalar(1e-9);
  static constexpr Scalar pivot = Scalar(1e-9);
  static constexpr Scalar optimality = Scalar(1e-11);
};

template <typename Scalar = double>
struct LinearProgram {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector lower;
  Vector upper;
  Matrix rows;                      // one row per constraint
  std::vector<Relation> relations;
  Vector rhs;
  Vector objective;
  Direction direction = Direction::Minimize;

  LinearProgram() = default;
  LinearProgram(Eigen::Index num_vars, Eigen::Index num_constraints)
      : lower(Vector::Zero(num_vars)),
        upper(Vector::Constant(num_vars, std::numeric_limits<Scalar>::infinity())),
        rows(Matrix::Zero(num_constraints, num_vars)),
        relations(static_cast<std::size_t>(num_constraints), Relation::LessEqual),
        rhs(Vector::Zero(num_constraints)),
        objective(Vector::Zero(num_vars)) {}

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_constraints() const { return rows.rows(); }

  void add_constraint(const Vector& row, Relation rel, Scalar b) {
    if (row.size() != num_vars()) throw std::invalid_argument("constraint row length mismatch");
    const Eigen::Index m = rows.rows();
    rows.conservativeResize(m + 1, num_vars());
    rows.row(m) = row.transpose();
    rhs.conservativeResize(m + 1);
    rhs(m) = b;
    relations.push_back(rel);
  }

  /// Throws std::domain_error when the invariants of a well-formed problem fail.
  void validate() const {
    const Eigen::Index n = num_vars();
    if (lower.size() != n || upper.size() != n) throw std::domain_error("bound vector length mismatch");
    if (rows.cols() != n && rows.rows() > 0) throw std::domain_error("constraint row length mismatch");
    if (rhs.size() != rows.rows() || static_cast<Eigen::Index>(relations.size()) != rows.rows()) {
      throw std::domain_error("constraint count mismatch");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isnan(lower(j)) || std::isnan(upper(j)) || lower(j) > upper(j)) {
        throw std::domain_error("variable " + std::to_string(j) + " has lower > upper");
      }
      if (lower(j) == std::numeric_limits<Scalar>::infinity() ||
          upper(j) == -std::numeric_limits<Scalar>::infinity()) {
        throw std::domain_error("variable " + std::to_string(j) + " has an empty box");
      }
    }
    if (!rows.allFinite() || !rhs.allFinite() || !objective.allFinite()) {
      throw std::domain_error("non-finite coefficient");
    }
  }
};

template <typename Scalar = double>
struct LpSolution {
  Status status = Status::Infeasible;
  Scalar value = std::numeric_limits<Scalar>::quiet_NaN();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> assignment;
  int iterations = 0;
};

template <typename Scalar = double>
struct FeasibilityReport {
  bool feasible = false;
  Scalar max_violation = 0;
};

/// Independent certificate check: the largest bound or constraint violation of
/// `assignment`, feasible when it does not exceed `tol`.
template <typename Scalar>
FeasibilityReport<Scalar> check_feasible(const LinearProgram<Scalar>& problem,
                                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& assignment,
                                         Scalar tol = Tolerances<Scalar>::feasibility) {
  if (assignment.size() != problem.num_vars()) {
    throw std::invalid_argument("assignment length does not match the number of variables");
  }
  if (!assignment.allFinite()) return {false, std::numeric_limits<Scalar>::infinity()};
  Scalar worst = 0;
  for (Eigen::Index j = 0; j < assignment.size(); ++j) {
    worst = std::max(worst, problem.lower(j) - assignment(j));
    worst = std::max(worst, assignment(j) - problem.upper(j));
  }
  for (Eigen::Index i = 0; i < problem.num_constraints(); ++i) {
    const Scalar lhs = problem.rows.row(i).dot(assignment);
    const Scalar gap = lhs - problem.rhs(i);
    switch (problem.relations[static_cast<std::size_t>(i)]) {
      case Relation::Equal: worst = std::max(worst, std::abs(gap)); break;
      case Relation::LessEqual: worst = std::max(worst, gap); break;
      case Relation::GreaterEqual: worst = std::max(worst, -gap); break;
    }
  }
  return {!(worst > tol), worst};
}

struct SolverOptions {
  Pricing pricing = Pricing::Dantzig;
  int refactor_interval = 64;
  int max_iterations = 20000;
};

/// Simplex state kept across solves so several objectives over one feasible
/// region can be optimized from the previous optimal basis.
template <typename Scalar = double>
class SimplexSolver {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit SimplexSolver(const LinearProgram<Scalar>& problem, SolverOptions options = {})
      : problem_(problem), options_(options) {
    problem_.validate();
    equilibrate();
    build_columns();
  }

  /// Optimizes the objective stored in the problem.
  LpSolution<Scalar> solve() { return solve(problem_.objective, problem_.direction); }

  /// Optimizes a new objective over the same constraints, reusing the last basis.
  LpSolution<Scalar> solve(const Vector& objective, Direction direction) {
    if (objective.size() != n_) throw std::invalid_argument("objective length mismatch");
    const int first_iteration = iterations_;
    if (!phase_one_done_) {
      start_basis();
      phase_one_done_ = true;
      feasible_ = run_phase_one();
      if (feasible_) drive_out_artificials();
    }
    LpSolution<Scalar> out;
    out.iterations = iterations_ - first_iteration;
    if (!feasible_) {
      out.status = Status::Infeasible;
      return out;
    }
    const Scalar sign = direction == Direction::Maximize ? Scalar(-1) : Scalar(1);
    cost_ = Vector::Zero(ncols_);
    cost_.head(n_) = sign * objective.cwiseProduct(col_scale_);
    const Scalar cost_norm = cost_.cwiseAbs().maxCoeff();
    if (cost_norm > 0) cost_ /= cost_norm;
    const bool bounded = run_phase();
    out.iterations = iterations_ - first_iteration;
    out.status = bounded ? Status::Optimal : Status::Unbounded;
    out.assignment = structural_values();
    out.value = objective.dot(out.assignment);
    return out;
  }

 private:
  static constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();
  static constexpr Scalar kTieTolerance = Scalar(1e-12);
  static constexpr Scalar kHarrisSlack = Scalar(1e-10);
  static constexpr int kBlandAfterDegenerate = 8;
  static constexpr int kDegenerateRunLimit = 50;
  enum class Where { Basic, AtLower, AtUpper, FreeZero };

  // Columns first, then rows. Callers that normalize each row by its
  // right-hand side keep that normalization, and the column pass then brings
  // every variable to the magnitude the data implies.
  void equilibrate() {
    const Eigen::Index m = problem_.num_constraints();
    n_ = problem_.num_vars();
    row_scale_ = Vector::Ones(m);
    col_scale_ = Vector::Ones(n_);
    a_ = problem_.rows;
    for (Eigen::Index j = 0; j < n_; ++j) {
      const Scalar big = m > 0 ? a_.col(j).cwiseAbs().maxCoeff() : Scalar(0);
      if (big > 0) col_scale_(j) = Scalar(1) / big;
    }
    a_ = a_ * col_scale_.asDiagonal();
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar big = a_.row(i).cwiseAbs().maxCoeff();
      if (big > 0) row_scale_(i) = Scalar(1) / big;
    }
    a_ = row_scale_.asDiagonal() * a_;
    b_ = row_scale_.cwiseProduct(problem_.rhs);
  }

  void build_columns() {
    const Eigen::Index m = a_.rows();
    m_ = m;
    Eigen::Index slacks = 0;
    for (auto r : problem_.relations) slacks += r != Relation::Equal;
    ncols_ = n_ + slacks;
    full_ = Matrix::Zero(m, ncols_);
    full_.leftCols(n_) = a_;
    lo_ = Vector(ncols_);
    hi_ = Vector(ncols_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      lo_(j) = problem_.lower(j) / col_scale_(j);
      hi_(j) = problem_.upper(j) / col_scale_(j);
    }
    slack_of_row_.assign(static_cast<std::size_t>(m), -1);
    Eigen::Index s = n_;
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto rel = problem_.relations[static_cast<std::size_t>(i)];
      if (rel == Relation::Equal) continue;
      full_(i, s) = 1;
      lo_(s) = rel == Relation::LessEqual ? Scalar(0) : -kInf;
      hi_(s) = rel == Relation::LessEqual ? kInf : Scalar(0);
      slack_of_row_[static_cast<std::size_t>(i)] = s;
      ++s;
    }
  }

  void start_basis() {
    where_.assign(static_cast<std::size_t>(ncols_), Where::AtLower);
    x_ = Vector::Zero(ncols_);
    for (Eigen::Index j = 0; j < ncols_; ++j) {
      auto& w = where_[static_cast<std::size_t>(j)];
      if (std::isfinite(lo_(j))) {
        w = Where::AtLower;
        x_(j) = lo_(j);
      } else if (std::isfinite(hi_(j))) {
        w = Where::AtUpper;
        x_(j) = hi_(j);
      } else {
        w = Where::FreeZero;
        x_(j) = 0;
      }
    }
    basis_.assign(static_cast<std::size_t>(m_), -1);
    art_sign_ = Vector::Ones(m_);
    // Residual with every structural nonbasic at its starting bound.
    const Vector residual = b_ - a_ * x_.head(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index s = slack_of_row_[static_cast<std::size_t>(i)];
      if (s >= 0 && residual(i) >= lo_(s) && residual(i) <= hi_(s)) {
        basis_[static_cast<std::size_t>(i)] = s;
        where_[static_cast<std::size_t>(s)] = Where::Basic;
        x_(s) = 0;
      } else {
        art_sign_(i) = residual(i) >= 0 ? Scalar(1) : Scalar(-1);
      }
    }
    refactor_or_throw();
  }

  // Rebuilds the tableau and basic values from the original columns. Returns
  // false, leaving the tableau unusable, when the basis is numerically singular.
  bool refactor() {
    Matrix basis_matrix = Matrix::Zero(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index col = basis_[static_cast<std::size_t>(i)];
      if (col >= 0) {
        basis_matrix.col(i) = full_.col(col);
      } else {
        basis_matrix(i, i) = art_sign_(i);
      }
    }
    Vector nonbasic_x = x_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index col = basis_[static_cast<std::size_t>(i)];
      if (col >= 0) nonbasic_x(col) = 0;
    }
    Eigen::PartialPivLU<Matrix> lu(basis_matrix);
    tableau_ = lu.solve(full_);
    beta_ = lu.solve(b_ - full_ * nonbasic_x);
    if (!tableau_.allFinite() || !beta_.allFinite()) return false;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index col = basis_[static_cast<std::size_t>(i)];
      if (col >= 0) x_(col) = beta_(i);
    }
    since_refactor_ = 0;
    return true;
  }

  void refactor_or_throw() {
    if (!refactor()) throw NumericalError("simplex basis became singular");
  }

  void save() { saved_ = {basis_, where_, x_}; }

  // Refactorizes after a run of pivots. If round-off let a pivot make the basis
  // singular, returns to the last good basis, bans the column that entered
  // last, and refactorizes after every pivot for a while.
  bool refresh() {
    if (refactor()) {
      save();
      if (careful_left_ > 0) --careful_left_;
      banned_.clear();
      return true;
    }
    basis_ = saved_.basis;
    where_ = saved_.where;
    x_ = saved_.x;
    refactor_or_throw();
    if (careful_left_ > 0 && last_entering_ >= 0) banned_.push_back(last_entering_);
    careful_left_ = 2 * options_.refactor_interval;
    return false;
  }

  bool banned(Eigen::Index j) const { return std::find(banned_.begin(), banned_.end(), j) != banned_.end(); }

  Scalar basic_lower(Eigen::Index row) const {
    const Eigen::Index col = basis_[static_cast<std::size_t>(row)];
    return col >= 0 ? lo_(col) : Scalar(0);
  }
  Scalar basic_upper(Eigen::Index row) const {
    const Eigen::Index col = basis_[static_cast<std::size_t>(row)];
    if (col >= 0) return hi_(col);
    return in_phase_one_ ? kInf : Scalar(0);
  }
  // Ordering key used by Bland's rule; artificials rank after every real column.
  Eigen::Index basic_key(Eigen::Index row) const {
    const Eigen::Index col = basis_[static_cast<std::size_t>(row)];
    return col >= 0 ? col : ncols_ + row;
  }

  Vector reduced_costs() const {
    Vector cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index col = basis_[static_cast<std::size_t>(i)];
      cb(i) = col >= 0 ? cost_(col) : (in_phase_one_ ? Scalar(1) : Scalar(0));
    }
    return cost_ - tableau_.transpose() * cb;
  }

  Scalar objective_value() const {
    // Basic values live in beta_; x_ is only current for nonbasic columns.
    Scalar v = 0;
    for (Eigen::Index j = 0; j < ncols_; ++j) {
      if (where_[static_cast<std::size_t>(j)] != Where::Basic) v += cost_(j) * x_(j);
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index col = basis_[static_cast<std::size_t>(i)];
      if (col >= 0) v += cost_(col) * beta_(i);
      else if (in_phase_one_) v += beta_(i);
    }
    return v;
  }

  bool run_phase_one() {
    in_phase_one_ = true;
    cost_ = Vector::Zero(ncols_);
    run_phase();
    Scalar infeasibility = 0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < 0) infeasibility += std::abs(beta_(i));
    }
    in_phase_one_ = false;
    return infeasibility <= Tolerances<Scalar>::feasibility;
  }

  // Pivots zero-valued artificials out of the basis where a real column allows it.
  void drive_out_artificials() {
    refactor_or_throw();
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] >= 0) continue;
      Eigen::Index best = -1;
      Scalar best_mag = Tolerances<Scalar>::pivot * 1e3;
      for (Eigen::Index j = 0; j < ncols_; ++j) {
        if (where_[static_cast<std::size_t>(j)] == Where::Basic) continue;
        const Scalar mag = std::abs(tableau_(r, j));
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row; artificial stays fixed at zero
      const Scalar entering_value = x_(best);
      pivot(r, best);
      x_(best) = entering_value;
      refactor_or_throw();
    }
  }

  void pivot(Eigen::Index r, Eigen::Index q) {
    const Scalar alpha = tableau_(r, q);
    tableau_.row(r) /= alpha;
    Vector col = tableau_.col(q);
    col(r) = 0;
    tableau_.noalias() -= col * tableau_.row(r);
    basis_[static_cast<std::size_t>(r)] = q;
    where_[static_cast<std::size_t>(q)] = Where::Basic;
    ++since_refactor_;
  }

  // Returns false when the objective is unbounded.
  bool run_phase() {
    const Scalar opt_tol = Tolerances<Scalar>::optimality;
    const Scalar piv_tol = Tolerances<Scalar>::pivot;
    refactor_or_throw();
    save();
    banned_.clear();
    last_entering_ = -1;
    Vector d = reduced_costs();
    Scalar confirmed = kInf;
    int degenerate_run = 0;
    while (true) {
      if (++iterations_ > options_.max_iterations) {
        throw NumericalError("simplex iteration limit exceeded");
      }
      // Pricing.
      const bool bland = options_.pricing == Pricing::Bland || degenerate_run > kBlandAfterDegenerate;
      Eigen::Index q = -1;
      Scalar dir = 0;
      Scalar best_score = 0;
      for (Eigen::Index j = 0; j < ncols_; ++j) {
        const Where w = where_[static_cast<std::size_t>(j)];
        if (w == Where::Basic || lo_(j) == hi_(j) || (!banned_.empty() && banned(j))) continue;
        Scalar want = 0;
        if ((w == Where::AtLower || w == Where::FreeZero) && d(j) < -opt_tol) want = 1;
        else if ((w == Where::AtUpper || w == Where::FreeZero) && d(j) > opt_tol) want = -1;
        if (want == 0) continue;
        if (bland) {
          q = j;
          dir = want;
          break;
        }
        const Scalar score = std::abs(d(j));
        if (score > best_score) {
          best_score = score;
          q = j;
          dir = want;
        }
      }
      if (q < 0) {
        // Confirm optimality on a fresh factorization. A column banned after a
        // singular pivot is given up on rather than retried.
        // A confirmation that does not improve on the previous one means
        // round-off is steering between equivalent bases; stop there.
        if (since_refactor_ == 0 || !banned_.empty()) return true;
        const Scalar value = objective_value();
        if (value >= confirmed - kTieTolerance * (1 + std::abs(value))) return true;
        confirmed = value;
        refresh();
        d = reduced_costs();
        continue;
      }

      // Two-pass (Harris) ratio test: the first pass finds the longest step
      // that keeps every basic variable within its bounds relaxed by
      // kHarrisSlack, the second picks the largest pivot among the rows that
      // block before that step. Large pivots keep the basis well conditioned
      // when columns are nearly dependent.
      auto limit_of = [&](Eigen::Index i, Scalar slack, bool& to_upper) {
        const Scalar delta = -dir * tableau_(i, q);  // change of basic i per unit step
        if (delta < 0) {
          to_upper = false;
          const Scalar lb = basic_lower(i);
          return std::isfinite(lb) ? std::max(Scalar(0), (beta_(i) - lb + slack) / -delta) : kInf;
        }
        to_upper = true;
        const Scalar ub = basic_upper(i);
        return std::isfinite(ub) ? std::max(Scalar(0), (ub - beta_(i) + slack) / delta) : kInf;
      };
      const Scalar box = hi_(q) - lo_(q);
      Scalar relaxed = box;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (std::abs(tableau_(i, q)) <= piv_tol) continue;
        bool up;
        relaxed = std::min(relaxed, limit_of(i, kHarrisSlack, up));
      }
      Scalar step = box;
      Eigen::Index leave_row = -1;
      bool leave_to_upper = false;
      // Long runs of degenerate pivots fall back to the textbook minimum-ratio
      // row with Bland's tie rule, which cannot cycle.
      const bool textbook = degenerate_run > kDegenerateRunLimit;
      if (textbook) {
        for (Eigen::Index i = 0; i < m_; ++i) {
          if (std::abs(tableau_(i, q)) <= piv_tol) continue;
          bool up;
          const Scalar limit = limit_of(i, Scalar(0), up);
          const Scalar tie = kTieTolerance * std::max(Scalar(1), std::isfinite(step) ? step : Scalar(1));
          if (limit < step - tie || (leave_row >= 0 && limit <= step + tie && basic_key(i) < basic_key(leave_row))) {
            step = limit;
            leave_row = i;
            leave_to_upper = up;
          }
        }
      } else if (!(box <= relaxed)) {
        Scalar best_alpha = 0;
        for (Eigen::Index i = 0; i < m_; ++i) {
          const Scalar mag = std::abs(tableau_(i, q));
          if (mag <= piv_tol) continue;
          bool up;
          const Scalar limit = limit_of(i, Scalar(0), up);
          if (limit > relaxed) continue;
          const bool better = mag > best_alpha * (1 + kTieTolerance) ||
                              (bland && mag >= best_alpha * (1 - kTieTolerance) &&
                               basic_key(i) < basic_key(leave_row));
          if (leave_row < 0 || better) {
            best_alpha = mag;
            leave_row = i;
            leave_to_upper = up;
            step = limit;
          }
        }
      }
      if (!std::isfinite(step)) return false;
      degenerate_run = step > 0 ? 0 : degenerate_run + 1;

      beta_.noalias() -= (dir * step) * tableau_.col(q);
      const Scalar entering_value = x_(q) + dir * step;
      if (leave_row < 0) {
        // Bound flip.
        x_(q) = dir > 0 ? hi_(q) : lo_(q);
        where_[static_cast<std::size_t>(q)] = dir > 0 ? Where::AtUpper : Where::AtLower;
      } else {
        const Eigen::Index leaving = basis_[static_cast<std::size_t>(leave_row)];
        if (leaving >= 0) {
          x_(leaving) = leave_to_upper ? hi_(leaving) : lo_(leaving);
          where_[static_cast<std::size_t>(leaving)] = leave_to_upper ? Where::AtUpper : Where::AtLower;
        }
        const Scalar dq = d(q);
        pivot(leave_row, q);
        last_entering_ = q;
        beta_(leave_row) = entering_value;
        x_(q) = entering_value;
        d.noalias() -= dq * tableau_.row(leave_row).transpose();
        if (since_refactor_ >= (careful_left_ > 0 ? 1 : options_.refactor_interval)) {
          refresh();
          d = reduced_costs();
        }
      }
    }
  }

  Vector structural_values() {
    refactor_or_throw();
    Vector x(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      Scalar v = x_(j);
      // Snap round-off back into the box.
      v = std::clamp(v, lo_(j), hi_(j));
      x(j) = v * col_scale_(j);
    }
    return x;
  }

  LinearProgram<Scalar> problem_;
  SolverOptions options_;
  Eigen::Index n_ = 0, m_ = 0, ncols_ = 0;
  Vector row_scale_, col_scale_;
  Matrix a_;
  Vector b_;
  Matrix full_;
  Vector lo_, hi_;
  std::vector<Eigen::Index> slack_of_row_;

  std::vector<Where> where_;
  std::vector<Eigen::Index> basis_;  // column per row, -1 for an artificial
  Vector art_sign_;
  Vector x_;
  Vector beta_;
  Matrix tableau_;
  Vector cost_;
  bool in_phase_one_ = false;
  bool phase_one_done_ = false;
  bool feasible_ = false;
  int since_refactor_ = 0;
  int iterations_ = 0;

  struct Snapshot {
    std::vector<Eigen::Index> basis;
    std::vector<Where> where;
    Vector x;
  };
  Snapshot saved_;
  int careful_left_ = 0;
  std::vector<Eigen::Index> banned_;
  Eigen::Index last_entering_ = -1;
};

/// Global optimum of `problem`; infeasible and unbounded are reported in the status.
template <typename Scalar>
LpSolution<Scalar> solve(const LinearProgram<Scalar>& problem, SolverOptions options = {}) {
  SimplexSolver<Scalar> solver(problem, options);
  return solver.solve();
}

template <typename To, typename From>
LinearProgram<To> cast(const LinearProgram<From>& problem) {
  LinearProgram<To> out;
  out.lower = problem.lower.template cast<To>();
  out.upper = problem.upper.template cast<To>();
  out.rows = problem.rows.template cast<To>();
  out.relations = problem.relations;
  out.rhs = problem.rhs.template cast<To>();
  out.objective = problem.objective.template cast<To>();
  out.direction = problem.direction;
  return out;
}

template <typename To, typename From>
LpSolution<To> cast(const LpSolution<From>& solution) {
  LpSolution<To> out;
  out.status = solution.status;
  out.value = static_cast<To>(solution.value);
  out.assignment = solution.assignment.template cast<To>();
  out.iterations = solution.iterations;
  return out;
}

/// Solves in double and repeats the solve in long double on NumericalError.
inline LpSolution<double> solve_robust(const LinearProgram<double>& problem, SolverOptions options = {}) {
  try {
    return solve(problem, options);
  } catch (const NumericalError&) {
    return cast<double>(solve(cast<long double>(problem), options));
  }
}

/// Writes the problem in CPLEX LP text format for cross-checking with external solvers.
template <typename Scalar>
void write_lp_format(std::ostream& os, const LinearProgram<Scalar>& problem) {
  auto term = [&os](Scalar c, Eigen::Index j, bool first) {
    if (c == 0) return false;
    os << (c < 0 ? " - " : (first ? " " : " + ")) << std::abs(static_cast<double>(c)) << " x" << j;
    return true;
  };
  os.precision(17);
  os << (problem.direction == Direction::Minimize ? "Minimize" : "Maximize") << "\n obj:";
  bool first = true;
  for (Eigen::Index j = 0; j < problem.num_vars(); ++j) {
    if (term(problem.objective(j), j, first)) first = false;
  }
  if (first) os << " 0 x0";
  os << "\nSubject To\n";
  for (Eigen::Index i = 0; i < problem.num_constraints(); ++i) {
    os << " c" << i << ":";
    bool f = true;
    for (Eigen::Index j = 0; j < problem.num_vars(); ++j) {
      if (term(problem.rows(i, j), j, f)) f = false;
    }
    if (f) os << " 0 x0";
    switch (problem.relations[static_cast<std::size_t>(i)]) {
      case Relation::Equal: os << " = "; break;
      case Relation::LessEqual: os << " <= "; break;
      case Relation::GreaterEqual: os << " >= "; break;
    }
    os << static_cast<double>(problem.rhs(i)) << "\n";
  }
  os << "Bounds\n";
  for (Eigen::Index j = 0; j < problem.num_vars(); ++j) {
    const double lo = static_cast<double>(problem.lower(j));
    const double hi = static_cast<double>(problem.upper(j));
    if (std::isinf(lo) && std::isinf(hi)) {
      os << " x" << j << " free\n";
    } else {
      os << " ";
      if (std::isinf(lo)) os << "-inf"; else os << lo;
      os << " <= x" << j << " <= ";
      if (std::isinf(hi)) os << "+inf"; else os << hi;
      os << "\n";
    }
  }
  os << "End\n";
}

}  // namespace chshmdi::lp

#endif  // CHSHMDI_LP_HPP
