#pragma once

// Self-contained dense two-phase tableau simplex.
//
//   maximize    c^T x
//   subject to  a_i^T x  (<= | = | >=)  b_i,   x >= 0
//
// Pivoting uses Dantzig's rule and falls back to Bland's rule after a run of
// non-improving (degenerate) pivots. Duals y are read from the reduced costs
// of each row's initial unit column, so the returned certificate satisfies
// b^T y = c^T x at optimality with y_i >= 0 on <= rows, y_i <= 0 on >= rows.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "spot/errors.hpp"

namespace spot::lp {

enum class Sense { less_equal, equal, greater_equal };
enum class Status { optimal, infeasible, unbounded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible:
      return "infeasible";
    case Status::unbounded:
      return "unbounded";
  }
  return "?";
}

struct Constraint {
  std::vector<double> coeffs;
  Sense sense = Sense::less_equal;
  double rhs = 0.0;
};

struct Problem {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<Constraint> rows;

  explicit Problem(int n = 0) : num_vars(n), objective(static_cast<std::size_t>(n), 0.0) {}

  Constraint& add_row(Sense sense, double rhs) {
    rows.push_back({std::vector<double>(static_cast<std::size_t>(num_vars), 0.0), sense, rhs});
    return rows.back();
  }
};

struct Result {
  Status status = Status::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;
  double dual_objective = 0.0;
  long pivots = 0;
  bool used_bland = false;
};

struct Options {
  double pivot_tol = 1e-10;
  double optimality_tol = 1e-10;
  double feasibility_tol = 1e-9;
  long stall_limit = 50;  // degenerate pivots before switching to Bland
  long max_pivots = 200000;
};

namespace detail {

class Tableau {
 public:
  Tableau(int rows, int cols)
      : rows_(rows),
        cols_(cols),
        width_(cols + 1),
        data_(static_cast<std::size_t>(rows) * (cols + 1), 0.0) {}

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * width_ + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * width_ + c]; }
  double& rhs(int r) { return at(r, cols_); }
  double rhs(int r) const { return at(r, cols_); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / at(pr, pc);
    double* prow = &at(pr, 0);
    for (int c = 0; c < width_; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      double* row = &at(r, 0);
      const double f = row[pc];
      if (f == 0.0) continue;
      for (int c = 0; c < width_; ++c) {
        row[c] -= f * prow[c];
        if (std::abs(row[c]) < 1e-15) row[c] = 0.0;
      }
      row[pc] = 0.0;
    }
  }

 private:
  int rows_;
  int cols_;
  int width_;
  std::vector<double> data_;
};

inline std::string dump(const Tableau& t, const std::vector<int>& basis) {
  std::ostringstream os;
  os.precision(17);
  os << "basis";
  for (int c = 0; c < t.cols(); ++c) os << ",x" << c;
  os << ",rhs\n";
  for (int r = 0; r < t.rows(); ++r) {
    os << basis[r];
    for (int c = 0; c <= t.cols(); ++c) os << ',' << t.at(r, c);
    os << '\n';
  }
  return os.str();
}

}  // namespace detail

inline Result solve(const Problem& problem, const Options& opt = {}) {
  const int n = problem.num_vars;
  const int m = static_cast<int>(problem.rows.size());
  if (static_cast<int>(problem.objective.size()) != n)
    throw StructuralError("lp::solve: objective length mismatch");

  // Column layout: [x | slack/surplus | artificial]
  std::vector<bool> flipped(static_cast<std::size_t>(m), false);
  std::vector<Sense> sense(static_cast<std::size_t>(m));
  int num_slack = 0, num_art = 0;
  for (int i = 0; i < m; ++i) {
    const auto& row = problem.rows[i];
    if (static_cast<int>(row.coeffs.size()) != n)
      throw StructuralError("lp::solve: row " + std::to_string(i) + " has wrong length");
    Sense sn = row.sense;
    if (row.rhs < 0.0) {
      flipped[i] = true;
      if (sn == Sense::less_equal)
        sn = Sense::greater_equal;
      else if (sn == Sense::greater_equal)
        sn = Sense::less_equal;
    }
    sense[i] = sn;
    if (sn != Sense::equal) ++num_slack;
    if (sn != Sense::less_equal) ++num_art;
  }
  const int art_begin = n + num_slack;
  const int cols = art_begin + num_art;

  detail::Tableau tab(m, cols);
  std::vector<int> basis(static_cast<std::size_t>(m));
  std::vector<int> unit_col(static_cast<std::size_t>(m));
  {
    int next_slack = n, next_art = art_begin;
    for (int i = 0; i < m; ++i) {
      const auto& row = problem.rows[i];
      const double sign = flipped[i] ? -1.0 : 1.0;
      for (int j = 0; j < n; ++j) tab.at(i, j) = sign * row.coeffs[j];
      tab.rhs(i) = sign * row.rhs;
      switch (sense[i]) {
        case Sense::less_equal:
          tab.at(i, next_slack) = 1.0;
          unit_col[i] = next_slack++;
          break;
        case Sense::greater_equal:
          tab.at(i, next_slack++) = -1.0;
          tab.at(i, next_art) = 1.0;
          unit_col[i] = next_art++;
          break;
        case Sense::equal:
          tab.at(i, next_art) = 1.0;
          unit_col[i] = next_art++;
          break;
      }
      basis[i] = unit_col[i];
    }
  }

  Result result;
  std::vector<double> cost(static_cast<std::size_t>(cols), 0.0);
  std::vector<bool> allowed(static_cast<std::size_t>(cols), true);
  std::vector<double> reduced(static_cast<std::size_t>(cols), 0.0);

  auto compute_reduced = [&] {
    for (int j = 0; j < cols; ++j) reduced[j] = -cost[j];
    for (int r = 0; r < m; ++r) {
      const double cb = cost[basis[r]];
      if (cb == 0.0) continue;
      for (int j = 0; j < cols; ++j) reduced[j] += cb * tab.at(r, j);
    }
  };
  auto current_objective = [&] {
    double z = 0.0;
    for (int r = 0; r < m; ++r) z += cost[basis[r]] * tab.rhs(r);
    return z;
  };

  // Returns false when the phase is unbounded.
  auto run_phase = [&]() -> bool {
    bool bland = false;
    long stalled = 0;
    double last_obj = current_objective();
    for (;;) {
      compute_reduced();
      int enter = -1;
      double best = -opt.optimality_tol;
      for (int j = 0; j < cols; ++j) {
        if (!allowed[j] || reduced[j] >= -opt.optimality_tol) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (reduced[j] < best) {
          best = reduced[j];
          enter = j;
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m; ++r) {
        const double a = tab.at(r, enter);
        if (a <= opt.pivot_tol) continue;
        const double ratio = std::max(tab.rhs(r), 0.0) / a;
        if (leave < 0 || ratio < best_ratio - 1e-12) {
          best_ratio = ratio;
          leave = r;
        } else if (ratio <= best_ratio + 1e-12 && basis[r] < basis[leave]) {
          leave = r;
        }
      }
      if (leave < 0) return false;

      tab.pivot(leave, enter);
      basis[leave] = enter;
      if (++result.pivots > opt.max_pivots)
        throw SolverError("simplex did not terminate within " + std::to_string(opt.max_pivots) +
                          " pivots\n" + detail::dump(tab, basis));

      const double obj = current_objective();
      if (obj > last_obj + 1e-12) {
        stalled = 0;
        last_obj = obj;
      } else if (!bland && ++stalled > opt.stall_limit) {
        bland = true;
        result.used_bland = true;
      }
    }
  };

  // Phase 1: maximize -sum(artificials).
  if (num_art > 0) {
    for (int j = art_begin; j < cols; ++j) cost[j] = -1.0;
    run_phase();
    double infeasibility = 0.0;
    for (int r = 0; r < m; ++r)
      if (basis[r] >= art_begin) infeasibility += std::max(tab.rhs(r), 0.0);
    if (infeasibility > opt.feasibility_tol) {
      result.status = Status::infeasible;
      return result;
    }
    // Pivot zero-level artificials out of the basis where possible; rows that
    // cannot be pivoted are redundant and keep their artificial at zero.
    for (int r = 0; r < m; ++r) {
      if (basis[r] < art_begin) continue;
      int best_col = -1;
      double best_abs = opt.pivot_tol;
      for (int j = 0; j < art_begin; ++j)
        if (std::abs(tab.at(r, j)) > best_abs) {
          best_abs = std::abs(tab.at(r, j));
          best_col = j;
        }
      if (best_col >= 0) {
        tab.pivot(r, best_col);
        basis[r] = best_col;
      }
    }
    for (int j = art_begin; j < cols; ++j) {
      cost[j] = 0.0;
      allowed[j] = false;
    }
  }

  // Phase 2.
  for (int j = 0; j < n; ++j) cost[j] = problem.objective[j];
  if (!run_phase()) {
    result.status = Status::unbounded;
    return result;
  }

  result.status = Status::optimal;
  result.x.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < m; ++r)
    if (basis[r] < n) result.x[basis[r]] = std::max(tab.rhs(r), 0.0);
  result.objective = 0.0;
  for (int j = 0; j < n; ++j) result.objective += problem.objective[j] * result.x[j];

  compute_reduced();
  result.duals.resize(static_cast<std::size_t>(m));
  result.dual_objective = 0.0;
  for (int i = 0; i < m; ++i) {
    const double y = reduced[unit_col[i]];
    result.duals[i] = flipped[i] ? -y : y;
    result.dual_objective += problem.rows[i].rhs * result.duals[i];
  }
  return result;
}

/// Largest violation of dual feasibility: A^T y >= c and the sign
/// conditions on y. Zero (up to rounding) for a valid certificate.
inline double dual_infeasibility(const Problem& problem, const std::vector<double>& y) {
  double worst = 0.0;
  for (int j = 0; j < problem.num_vars; ++j) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < problem.rows.size(); ++i) lhs += problem.rows[i].coeffs[j] * y[i];
    worst = std::max(worst, problem.objective[j] - lhs);
  }
  for (std::size_t i = 0; i < problem.rows.size(); ++i) {
    if (problem.rows[i].sense == Sense::less_equal) worst = std::max(worst, -y[i]);
    if (problem.rows[i].sense == Sense::greater_equal) worst = std::max(worst, y[i]);
  }
  return worst;
}

}  // namespace spot::lp
