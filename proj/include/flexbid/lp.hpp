#pragma once

// Thin model builder over HiGHS. Modules assemble sparse LP/MILP models row
// by row and get back primal values; solver state never escapes a call, so
// concurrent solves on separate Model instances are independent.

#include <Highs.h>

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "flexbid/common.hpp"

namespace flexbid::lp {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct SolverOptions {
  double primal_feasibility_tolerance = 1e-7;
  double dual_feasibility_tolerance = 1e-7;
  double mip_rel_gap = 0.0;
  double mip_abs_gap = 1e-9;
  double time_limit_s = inf;
};

enum class Status { Optimal, Infeasible, Unbounded, Failed };

struct Solution {
  Status status = Status::Failed;
  std::vector<double> x;
  double objective = 0.0;
  std::string detail;

  bool optimal() const { return status == Status::Optimal; }
};

struct Term {
  int var;
  double coef;
};

class Model {
 public:
  int add_variable(double lower, double upper, double cost, bool integer = false) {
    lower_.push_back(lower);
    upper_.push_back(upper);
    cost_.push_back(cost);
    integer_.push_back(integer);
    return static_cast<int>(cost_.size()) - 1;
  }

  /// lower <= sum(coef * x[var]) <= upper
  int add_row(double lower, double upper, const std::vector<Term>& terms) {
    int row = static_cast<int>(row_lower_.size());
    row_lower_.push_back(lower);
    row_upper_.push_back(upper);
    std::size_t first = triplets_.size();
    for (const auto& t : terms) {
      if (t.coef == 0.0) continue;
      // Repeated variables in one row are summed.
      bool merged = false;
      for (std::size_t i = first; i < triplets_.size(); ++i) {
        if (triplets_[i].col == t.var) {
          triplets_[i].value += t.coef;
          merged = true;
          break;
        }
      }
      if (!merged) triplets_.push_back({row, t.var, t.coef});
    }
    return row;
  }

  int add_equality(double rhs, const std::vector<Term>& terms) { return add_row(rhs, rhs, terms); }

  void set_cost(int var, double cost) { cost_.at(var) = cost; }

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(row_lower_.size()); }

  Solution solve(const SolverOptions& opts = {}) const {
    HighsLp model;
    model.num_col_ = num_variables();
    model.num_row_ = num_rows();
    model.col_cost_ = cost_;
    model.col_lower_ = lower_;
    model.col_upper_ = upper_;
    model.row_lower_ = row_lower_;
    model.row_upper_ = row_upper_;
    model.sense_ = ObjSense::kMinimize;
    model.offset_ = 0.0;

    // Column-wise compressed storage.
    auto& a = model.a_matrix_;
    a.format_ = MatrixFormat::kColwise;
    a.num_col_ = model.num_col_;
    a.num_row_ = model.num_row_;
    a.start_.assign(model.num_col_ + 1, 0);
    for (const auto& t : triplets_) ++a.start_[t.col + 1];
    for (int c = 0; c < model.num_col_; ++c) a.start_[c + 1] += a.start_[c];
    a.index_.resize(triplets_.size());
    a.value_.resize(triplets_.size());
    std::vector<HighsInt> fill(a.start_.begin(), a.start_.end() - 1);
    for (const auto& t : triplets_) {
      HighsInt pos = fill[t.col]++;
      a.index_[pos] = t.row;
      a.value_[pos] = t.value;
    }

    bool mip = false;
    for (bool b : integer_) mip = mip || b;
    if (mip) {
      model.integrality_.resize(model.num_col_);
      for (int c = 0; c < model.num_col_; ++c)
        model.integrality_[c] = integer_[c] ? HighsVarType::kInteger : HighsVarType::kContinuous;
    }

    Highs highs;
    highs.setOptionValue("output_flag", false);
    highs.setOptionValue("primal_feasibility_tolerance", opts.primal_feasibility_tolerance);
    highs.setOptionValue("dual_feasibility_tolerance", opts.dual_feasibility_tolerance);
    if (mip) {
      highs.setOptionValue("mip_rel_gap", opts.mip_rel_gap);
      highs.setOptionValue("mip_abs_gap", opts.mip_abs_gap);
    }
    if (opts.time_limit_s < inf) highs.setOptionValue("time_limit", opts.time_limit_s);

    Solution out;
    if (highs.passModel(std::move(model)) == HighsStatus::kError) {
      out.detail = "model rejected by solver";
      return out;
    }
    HighsStatus run = highs.run();
    HighsModelStatus ms = highs.getModelStatus();
    out.detail = highs.modelStatusToString(ms);
    switch (ms) {
      case HighsModelStatus::kOptimal:
        out.status = Status::Optimal;
        break;
      case HighsModelStatus::kInfeasible:
        out.status = Status::Infeasible;
        return out;
      case HighsModelStatus::kUnbounded:
      case HighsModelStatus::kUnboundedOrInfeasible:
        out.status = Status::Unbounded;
        return out;
      default:
        out.status = Status::Failed;
        return out;
    }
    if (run == HighsStatus::kError) {
      out.status = Status::Failed;
      return out;
    }
    out.x = highs.getSolution().col_value;
    out.objective = highs.getInfo().objective_function_value;
    return out;
  }

 private:
  struct Triplet {
    int row;
    int col;
    double value;
  };

  std::vector<double> lower_, upper_, cost_;
  std::vector<bool> integer_;
  std::vector<double> row_lower_, row_upper_;
  std::vector<Triplet> triplets_;
};

}  // namespace flexbid::lp
