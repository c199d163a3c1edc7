#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bdsc {

// Euclidean projection onto {v >= 0, sum v = total}.
void project_to_simplex(std::span<double> v, double total = 1.0);

enum class Feasibility { feasible, infeasible, indeterminate };

const char* to_string(Feasibility f);

// A coordinate range constrained either to a probability simplex or to a box.
struct ConvexBlock {
  enum class Kind { simplex, box };
  std::size_t begin = 0;
  std::size_t end = 0;
  Kind kind = Kind::simplex;
  std::vector<double> lo;  // box only, one entry per coordinate
  std::vector<double> hi;
};

// Find z with A z = b and z inside the product of blocks. Coordinates not covered by any
// block are unconstrained. A is dense row-major (rows x cols).
struct LinearFeasibilityProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<ConvexBlock> blocks;
  std::vector<double> start;  // optional initial point
};

struct FeasibilityOptions {
  int max_iterations = 20000;
  double feasible_below = 1e-7;
  double infeasible_above = 1e-5;
};

struct FeasibilityResult {
  Feasibility status = Feasibility::indeterminate;
  double residual = 0.0;  // max |A z - b| at the returned point
  int iterations = 0;
  std::vector<double> point;
};

// Alternating projection between the affine set and the block product. The residual
// decides the verdict: below feasible_below is feasible, above infeasible_above after the
// cap is infeasible, anything between is indeterminate.
FeasibilityResult solve_linear_feasibility(const LinearFeasibilityProblem& problem,
                                           const FeasibilityOptions& options = {});

}  // namespace bdsc
