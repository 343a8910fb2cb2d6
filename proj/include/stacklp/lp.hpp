#pragma once

// Dense two-phase primal simplex for small and medium LPs
//
//   minimize    c'x
//   subject to  a_r'x  (<= | >= | =)  b_r      for every row r
//               l_j <= x_j <= u_j              (l finite, u may be +inf)
//
// The problem is shifted to x' = x - l >= 0, finite upper bounds become rows,
// and rows are sign-normalised to b >= 0. Rows that own a singleton column
// (a variable with a positive coefficient in that row only) start with that
// variable basic; every other >= or = row gets an artificial. Phase I drives
// the artificials to zero, phase II optimises c. Pricing is Dantzig's rule
// until the iteration count passes `dantzig_budget`, then Bland's rule, which
// cannot cycle. The final basis is refactorised with an LU decomposition so
// the reported point, duals and reduced costs do not carry tableau drift.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "stacklp/error.hpp"
#include "stacklp/types.hpp"

namespace stacklp {

enum class Relation { less_equal, greater_equal, equal };

template <typename Scalar>
struct LpConstraint {
  RowVectorX<Scalar> coeffs;
  Relation relation = Relation::less_equal;
  Scalar rhs = 0;
};

template <typename Scalar>
struct LpProblem {
  VectorX<Scalar> objective;
  std::vector<LpConstraint<Scalar>> constraints;
  std::vector<std::pair<Scalar, Scalar>> bounds;  // one (lower, upper) per variable

  Index variables() const { return objective.size(); }

  // Variables default to [0, +inf).
  explicit LpProblem(Index n = 0)
      : objective(VectorX<Scalar>::Zero(n)),
        bounds(static_cast<std::size_t>(n), {Scalar(0), std::numeric_limits<Scalar>::infinity()}) {}

  void add(RowVectorX<Scalar> coeffs, Relation relation, Scalar rhs) {
    constraints.push_back({std::move(coeffs), relation, rhs});
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

template <typename Scalar>
struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  VectorX<Scalar> x;
  Scalar objective_value = 0;
  long iterations = 0;
  // Prices of the problem's constraints in their given orientation: >= rows
  // have nonnegative prices, <= rows nonpositive (minimisation).
  VectorX<Scalar> duals;
  // c_j - a_j'y for each variable, measured in the shifted space x - l.
  VectorX<Scalar> reduced_costs;
};

struct LpTolerances {
  double feasibility = 1e-7;
  double pivot = 1e-9;
  double optimality = 1e-9;
  long dantzig_budget = -1;  // default 50 * (variables + rows)
  long max_iterations = -1;  // default max(100000, 50 * (columns + rows))
};

template <typename Scalar>
void validate(const LpProblem<Scalar>& p) {
  const Index n = p.variables();
  if (n < 1) throw Error(ErrorCode::invalid_argument, "LP needs at least one variable");
  if (static_cast<Index>(p.bounds.size()) != n) {
    throw Error(ErrorCode::dimension_mismatch, "LP bounds do not match the variable count");
  }
  for (const auto& [lo, hi] : p.bounds) {
    if (!std::isfinite(static_cast<double>(lo))) {
      throw Error(ErrorCode::invalid_argument, "LP lower bounds must be finite");
    }
    if (std::isnan(static_cast<double>(hi))) throw Error(ErrorCode::invalid_argument, "LP upper bound is NaN");
  }
  for (const auto& row : p.constraints) {
    if (row.coeffs.size() != n) {
      throw Error(ErrorCode::dimension_mismatch, "LP constraint length does not match the variable count");
    }
  }
}

namespace detail {

template <typename Scalar>
class DenseSimplex {
 public:
  DenseSimplex(const LpProblem<Scalar>& p, const LpTolerances& tol) : problem_(p), tol_(tol) {}

  LpSolution<Scalar> solve() {
    LpSolution<Scalar> out;
    out.x = VectorX<Scalar>::Zero(problem_.variables());
    out.duals = VectorX<Scalar>::Zero(static_cast<Index>(problem_.constraints.size()));
    out.reduced_costs = VectorX<Scalar>::Zero(problem_.variables());
    if (!build()) {
      out.status = LpStatus::infeasible;
      return out;
    }
    const LpStatus status = run();
    out.iterations = iterations_;
    out.status = status;
    if (status != LpStatus::optimal) return out;

    const VectorX<Scalar> xb = basic_solution();
    VectorX<Scalar> xs = VectorX<Scalar>::Zero(cols_);
    for (Index r = 0; r < rows_; ++r) xs(basis_[r]) = std::max(Scalar(0), xb(r));
    for (Index j = 0; j < problem_.variables(); ++j) {
      out.x(j) = problem_.bounds[static_cast<std::size_t>(j)].first + xs(j);
    }
    out.objective_value = problem_.objective.dot(out.x);

    const VectorX<Scalar> y = row_prices();
    for (std::size_t r = 0; r < problem_.constraints.size(); ++r) {
      out.duals(static_cast<Index>(r)) = row_sign_[r] * y(static_cast<Index>(r));
    }
    out.reduced_costs = (cost2_ - a_.transpose() * y).head(problem_.variables());
    return out;
  }

 private:
  // Returns false when a variable has upper < lower.
  bool build() {
    const Index n = problem_.variables();
    const auto& rows = problem_.constraints;
    std::vector<Index> upper_rows;
    for (Index j = 0; j < n; ++j) {
      const auto [lo, hi] = problem_.bounds[static_cast<std::size_t>(j)];
      if (hi < lo) return false;
      if (std::isfinite(static_cast<double>(hi))) upper_rows.push_back(j);
    }
    const Index m = static_cast<Index>(rows.size() + upper_rows.size());

    // Row data after shifting by l and sign normalisation.
    MatrixX<Scalar> a_struct = MatrixX<Scalar>::Zero(m, n);
    VectorX<Scalar> b(m);
    std::vector<Relation> rel(static_cast<std::size_t>(m));
    VectorX<Scalar> lower(n);
    for (Index j = 0; j < n; ++j) lower(j) = problem_.bounds[static_cast<std::size_t>(j)].first;
    row_sign_.assign(static_cast<std::size_t>(m), Scalar(1));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      a_struct.row(static_cast<Index>(r)) = rows[r].coeffs;
      b(static_cast<Index>(r)) = rows[r].rhs - rows[r].coeffs.dot(lower.transpose());
      rel[r] = rows[r].relation;
    }
    for (std::size_t u = 0; u < upper_rows.size(); ++u) {
      const Index r = static_cast<Index>(rows.size() + u);
      const Index j = upper_rows[u];
      a_struct(r, j) = 1;
      b(r) = problem_.bounds[static_cast<std::size_t>(j)].second - lower(j);
      rel[static_cast<std::size_t>(r)] = Relation::less_equal;
    }
    for (Index r = 0; r < m; ++r) {
      if (b(r) < 0) {
        a_struct.row(r) *= -1;
        b(r) = -b(r);
        row_sign_[static_cast<std::size_t>(r)] = -1;
        auto& rr = rel[static_cast<std::size_t>(r)];
        if (rr == Relation::less_equal) rr = Relation::greater_equal;
        else if (rr == Relation::greater_equal) rr = Relation::less_equal;
      }
    }

    // Singleton columns can seed the basis of >= / = rows.
    std::vector<Index> crash(static_cast<std::size_t>(m), -1);
    for (Index j = 0; j < n; ++j) {
      Index only = -1;
      int nonzeros = 0;
      for (Index r = 0; r < m; ++r) {
        if (a_struct(r, j) != Scalar(0)) {
          ++nonzeros;
          only = r;
        }
      }
      if (nonzeros != 1 || a_struct(only, j) <= Scalar(0)) continue;
      if (rel[static_cast<std::size_t>(only)] == Relation::less_equal) continue;
      if (crash[static_cast<std::size_t>(only)] < 0) crash[static_cast<std::size_t>(only)] = j;
    }

    Index slack_count = 0, artificial_count = 0;
    for (Index r = 0; r < m; ++r) {
      const auto rr = rel[static_cast<std::size_t>(r)];
      if (rr != Relation::equal) ++slack_count;
      if (rr != Relation::less_equal && crash[static_cast<std::size_t>(r)] < 0) ++artificial_count;
    }
    rows_ = m;
    cols_ = n + slack_count + artificial_count;
    a_ = MatrixX<Scalar>::Zero(m, cols_);
    a_.leftCols(n) = a_struct;
    b_ = b;
    artificial_.assign(static_cast<std::size_t>(cols_), false);
    basis_.assign(static_cast<std::size_t>(m), -1);
    Index next_slack = n, next_art = n + slack_count;
    for (Index r = 0; r < m; ++r) {
      const auto rr = rel[static_cast<std::size_t>(r)];
      if (rr == Relation::less_equal) {
        a_(r, next_slack) = 1;
        basis_[static_cast<std::size_t>(r)] = next_slack++;
        continue;
      }
      if (rr == Relation::greater_equal) a_(r, next_slack++) = -1;
      const Index seed = crash[static_cast<std::size_t>(r)];
      if (seed >= 0) {
        // Scale the row so the seeding column has a unit entry.
        const Scalar s = a_(r, seed);
        a_.row(r) /= s;
        b_(r) /= s;
        row_sign_[static_cast<std::size_t>(r)] /= s;
        basis_[static_cast<std::size_t>(r)] = seed;
      } else {
        a_(r, next_art) = 1;
        artificial_[static_cast<std::size_t>(next_art)] = true;
        basis_[static_cast<std::size_t>(r)] = next_art++;
      }
    }

    cost2_ = VectorX<Scalar>::Zero(cols_);
    cost2_.head(n) = problem_.objective;
    cost1_ = VectorX<Scalar>::Zero(cols_);
    for (Index j = 0; j < cols_; ++j) {
      if (artificial_[static_cast<std::size_t>(j)]) cost1_(j) = 1;
    }
    has_artificials_ = artificial_count > 0;

    // Initial basis matrix is the identity, so the tableau is [A | b].
    tableau_.resize(m + 2, cols_ + 1);
    tableau_.topLeftCorner(m, cols_) = a_;
    tableau_.topRightCorner(m, 1) = b_;
    load_cost_row(m, cost2_);
    load_cost_row(m + 1, cost1_);

    const Index structural_plus_rows = n + m;
    dantzig_budget_ = tol_.dantzig_budget >= 0 ? tol_.dantzig_budget : 50 * structural_plus_rows;
    max_iterations_ = tol_.max_iterations >= 0 ? tol_.max_iterations
                                               : std::max<long>(100000, 50 * (cols_ + rows_));
    return true;
  }

  // Reduced costs c - c_B' (B^-1 A) and the negated objective in the rhs slot.
  void load_cost_row(Index row, const VectorX<Scalar>& cost) {
    VectorX<Scalar> cb(rows_);
    for (Index r = 0; r < rows_; ++r) cb(r) = cost(basis_[static_cast<std::size_t>(r)]);
    tableau_.row(row).head(cols_) = cost.transpose() - cb.transpose() * tableau_.topLeftCorner(rows_, cols_);
    tableau_(row, cols_) = -cb.dot(tableau_.topRightCorner(rows_, 1).col(0));
  }

  void pivot(Index r, Index q) {
    tableau_.row(r) /= tableau_(r, q);
    VectorX<Scalar> factors = tableau_.col(q);
    factors(r) = 0;
    tableau_.noalias() -= factors * tableau_.row(r);
    basis_[static_cast<std::size_t>(r)] = q;
    ++iterations_;
  }

  // Runs simplex iterations on the given cost row. Returns optimal,
  // unbounded or iteration_limit.
  LpStatus iterate(Index cost_row, bool allow_artificial) {
    const Scalar opt_tol = static_cast<Scalar>(tol_.optimality);
    const Scalar piv_tol = static_cast<Scalar>(tol_.pivot);
    while (true) {
      if (iterations_ >= max_iterations_) return LpStatus::iteration_limit;
      const bool bland = iterations_ >= dantzig_budget_;
      Index q = -1;
      Scalar best = -opt_tol;
      for (Index j = 0; j < cols_; ++j) {
        if (!allow_artificial && artificial_[static_cast<std::size_t>(j)]) continue;
        const Scalar d = tableau_(cost_row, j);
        if (d < best) {
          q = j;
          if (bland) break;
          best = d;
        }
      }
      if (q < 0) return LpStatus::optimal;

      Index r = -1;
      Scalar ratio = std::numeric_limits<Scalar>::infinity();
      for (Index i = 0; i < rows_; ++i) {
        const Scalar a = tableau_(i, q);
        if (a <= piv_tol) continue;
        const Scalar t = tableau_(i, cols_) / a;
        bool take = false;
        if (r < 0 || t < ratio - Scalar(1e-12) * (Scalar(1) + std::abs(ratio))) {
          take = true;
        } else if (t <= ratio + Scalar(1e-12) * (Scalar(1) + std::abs(ratio))) {
          take = bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(r)]
                       : a > tableau_(r, q);
        }
        if (take) {
          r = i;
          ratio = std::min(t, ratio);
        }
      }
      if (r < 0) return LpStatus::unbounded;
      pivot(r, q);
    }
  }

  LpStatus run() {
    const Index m = rows_;
    if (has_artificials_) {
      const LpStatus s = iterate(m + 1, true);
      if (s == LpStatus::iteration_limit) return s;
      refactor();
      const Scalar infeas = -tableau_(m + 1, cols_);
      if (infeas > static_cast<Scalar>(tol_.feasibility) * (Scalar(1) + b_.cwiseAbs().maxCoeff())) {
        return LpStatus::infeasible;
      }
      // Pivot zero-level artificials out where a structural column allows it.
      for (Index r = 0; r < m; ++r) {
        if (!artificial_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])]) continue;
        Index q = -1;
        Scalar best = static_cast<Scalar>(tol_.pivot);
        for (Index j = 0; j < cols_; ++j) {
          if (artificial_[static_cast<std::size_t>(j)]) continue;
          if (std::abs(tableau_(r, j)) > best) {
            best = std::abs(tableau_(r, j));
            q = j;
          }
        }
        if (q >= 0) pivot(r, q);
      }
    }
    // Optimise, refactor, and re-check: drift can leave a slightly negative
    // reduced cost or basic value that the fresh factorisation exposes.
    for (int round = 0; round < 5; ++round) {
      const LpStatus s = iterate(m, false);
      if (s != LpStatus::optimal) return s;
      refactor();
      if (primal_feasible() && dual_feasible()) return LpStatus::optimal;
      if (!primal_feasible()) return LpStatus::iteration_limit;
    }
    return LpStatus::iteration_limit;
  }

  MatrixX<Scalar> basis_matrix() const {
    MatrixX<Scalar> bm(rows_, rows_);
    for (Index r = 0; r < rows_; ++r) bm.col(r) = a_.col(basis_[static_cast<std::size_t>(r)]);
    return bm;
  }

  VectorX<Scalar> basic_solution() const { return tableau_.topRightCorner(rows_, 1).col(0); }

  // y = B^-T c_B for the phase II costs.
  VectorX<Scalar> row_prices() const {
    VectorX<Scalar> cb(rows_);
    for (Index r = 0; r < rows_; ++r) cb(r) = cost2_(basis_[static_cast<std::size_t>(r)]);
    return Eigen::PartialPivLU<MatrixX<Scalar>>(basis_matrix().transpose()).solve(cb);
  }

  // Rebuilds the tableau from the original data and the current basis.
  void refactor() {
    Eigen::PartialPivLU<MatrixX<Scalar>> lu(basis_matrix());
    tableau_.topLeftCorner(rows_, cols_) = lu.solve(a_);
    tableau_.topRightCorner(rows_, 1) = lu.solve(b_);
    load_cost_row(rows_, cost2_);
    load_cost_row(rows_ + 1, cost1_);
  }

  bool primal_feasible() const {
    const Scalar tol = static_cast<Scalar>(tol_.feasibility);
    return (basic_solution().array() >= -tol).all();
  }

  bool dual_feasible() const {
    const Scalar tol = static_cast<Scalar>(tol_.optimality);
    for (Index j = 0; j < cols_; ++j) {
      if (!artificial_[static_cast<std::size_t>(j)] && tableau_(rows_, j) < -tol) return false;
    }
    return true;
  }

  const LpProblem<Scalar>& problem_;
  LpTolerances tol_;
  Index rows_ = 0;
  Index cols_ = 0;
  MatrixX<Scalar> a_;
  VectorX<Scalar> b_;
  VectorX<Scalar> cost1_;
  VectorX<Scalar> cost2_;
  MatrixX<Scalar> tableau_;
  std::vector<Index> basis_;
  std::vector<bool> artificial_;
  std::vector<Scalar> row_sign_;
  bool has_artificials_ = false;
  long iterations_ = 0;
  long dantzig_budget_ = 0;
  long max_iterations_ = 0;
};

}  // namespace detail

template <typename Scalar>
LpSolution<Scalar> solve_lp(const LpProblem<Scalar>& problem, const LpTolerances& tol = {}) {
  validate(problem);
  return detail::DenseSimplex<Scalar>(problem, tol).solve();
}

// Largest violation of any constraint or bound at x (0 when feasible).
template <typename Scalar>
Scalar max_violation(const LpProblem<Scalar>& p, const VectorX<Scalar>& x) {
  Scalar worst = 0;
  for (const auto& row : p.constraints) {
    const Scalar lhs = row.coeffs.dot(x.transpose());
    Scalar v = 0;
    switch (row.relation) {
      case Relation::less_equal: v = lhs - row.rhs; break;
      case Relation::greater_equal: v = row.rhs - lhs; break;
      case Relation::equal: v = std::abs(lhs - row.rhs); break;
    }
    worst = std::max(worst, v);
  }
  for (Index j = 0; j < x.size(); ++j) {
    const auto [lo, hi] = p.bounds[static_cast<std::size_t>(j)];
    worst = std::max({worst, lo - x(j), x(j) - hi});
  }
  return worst;
}

// Plain-text standard form, one constraint per line:
//   variables <n>
//   minimize <c_1> ... <c_n>
//   bound <j> <lower> <upper|inf>
//   row <a_1> ... <a_n> <=|>=|= <rhs>
template <typename Scalar>
void write_lp_text(std::ostream& os, const LpProblem<Scalar>& p) {
  os << std::setprecision(17);
  os << "variables " << p.variables() << '\n';
  os << "minimize";
  for (Index j = 0; j < p.variables(); ++j) os << ' ' << p.objective(j);
  os << '\n';
  for (std::size_t j = 0; j < p.bounds.size(); ++j) {
    const auto [lo, hi] = p.bounds[j];
    os << "bound " << j << ' ' << lo << ' ';
    if (std::isinf(static_cast<double>(hi))) os << "inf"; else os << hi;
    os << '\n';
  }
  for (const auto& row : p.constraints) {
    os << "row";
    for (Index j = 0; j < row.coeffs.size(); ++j) os << ' ' << row.coeffs(j);
    os << (row.relation == Relation::less_equal ? " <= " : row.relation == Relation::greater_equal ? " >= " : " = ")
       << row.rhs << '\n';
  }
}

template <typename Scalar>
LpProblem<Scalar> read_lp_text(std::istream& is) {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::io_error, "LP text: " + why); };
  auto number = [&](const std::string& tok) -> Scalar {
    if (tok == "inf") return std::numeric_limits<Scalar>::infinity();
    try {
      return static_cast<Scalar>(std::stod(tok));
    } catch (const std::exception&) {
      fail("bad number '" + tok + "'");
    }
    return 0;
  };
  LpProblem<Scalar> p;
  Index n = -1;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (key == "variables") {
      if (toks.size() != 1) fail("malformed variables line");
      n = static_cast<Index>(std::stol(toks[0]));
      p = LpProblem<Scalar>(n);
      continue;
    }
    if (n < 0) fail("missing variables line");
    if (key == "minimize") {
      if (static_cast<Index>(toks.size()) != n) fail("objective length mismatch");
      for (Index j = 0; j < n; ++j) p.objective(j) = number(toks[static_cast<std::size_t>(j)]);
    } else if (key == "bound") {
      if (toks.size() != 3) fail("malformed bound line");
      const auto j = static_cast<std::size_t>(std::stol(toks[0]));
      if (j >= p.bounds.size()) fail("bound index out of range");
      p.bounds[j] = {number(toks[1]), number(toks[2])};
    } else if (key == "row") {
      if (static_cast<Index>(toks.size()) != n + 2) fail("row length mismatch");
      RowVectorX<Scalar> a(n);
      for (Index j = 0; j < n; ++j) a(j) = number(toks[static_cast<std::size_t>(j)]);
      const std::string& op = toks[static_cast<std::size_t>(n)];
      const Relation rel = op == "<=" ? Relation::less_equal
                           : op == ">=" ? Relation::greater_equal
                           : op == "="  ? Relation::equal
                                        : (fail("unknown relation '" + op + "'"), Relation::equal);
      p.add(a, rel, number(toks[static_cast<std::size_t>(n + 1)]));
    } else {
      fail("unknown line '" + key + "'");
    }
  }
  if (n < 0) fail("empty input");
  return p;
}

}  // namespace stacklp
