#include "bdsc/feasibility.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>

#include "bdsc/prob.hpp"

namespace bdsc {

void project_to_simplex(std::span<double> v, double total) {
  if (v.empty()) return;
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - total) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
}

const char* to_string(Feasibility f) {
  switch (f) {
    case Feasibility::feasible:
      return "feasible";
    case Feasibility::infeasible:
      return "infeasible";
    case Feasibility::indeterminate:
      return "indeterminate";
  }
  return "?";
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void project_blocks(const std::vector<ConvexBlock>& blocks, Eigen::VectorXd& z) {
  for (const auto& blk : blocks) {
    std::span<double> seg(z.data() + blk.begin, blk.end - blk.begin);
    if (blk.kind == ConvexBlock::Kind::simplex) {
      project_to_simplex(seg);
    } else {
      for (std::size_t k = 0; k < seg.size(); ++k) seg[k] = std::clamp(seg[k], blk.lo[k], blk.hi[k]);
    }
  }
}

}  // namespace

FeasibilityResult solve_linear_feasibility(const LinearFeasibilityProblem& problem,
                                           const FeasibilityOptions& options) {
  if (problem.a.size() != problem.rows * problem.cols || problem.b.size() != problem.rows)
    throw precondition_error("feasibility problem dimensions are inconsistent");
  for (const auto& blk : problem.blocks) {
    if (blk.end > problem.cols || blk.begin > blk.end)
      throw precondition_error("feasibility block out of range");
    if (blk.kind == ConvexBlock::Kind::box &&
        (blk.lo.size() != blk.end - blk.begin || blk.hi.size() != blk.end - blk.begin))
      throw precondition_error("box bounds must match block width");
  }

  const Eigen::Map<const RowMatrix> a(problem.a.data(), problem.rows, problem.cols);
  const Eigen::Map<const Eigen::VectorXd> b(problem.b.data(), problem.rows);
  const RowMatrix pinv = a.completeOrthogonalDecomposition().pseudoInverse();

  Eigen::VectorXd z = Eigen::VectorXd::Zero(problem.cols);
  if (problem.start.size() == problem.cols) {
    z = Eigen::Map<const Eigen::VectorXd>(problem.start.data(), problem.cols);
  }
  project_blocks(problem.blocks, z);

  FeasibilityResult out;
  auto residual_of = [&](const Eigen::VectorXd& v) {
    return problem.rows == 0 ? 0.0 : (a * v - b).cwiseAbs().maxCoeff();
  };
  double residual = residual_of(z);
  double checkpoint = residual;
  int it = 0;
  while (residual >= options.feasible_below && it < options.max_iterations) {
    z -= pinv * (a * z - b);
    project_blocks(problem.blocks, z);
    residual = residual_of(z);
    ++it;
    // Stop once progress stalls well above the feasibility band.
    if (it % 200 == 0) {
      if (residual > options.infeasible_above && residual > 0.999 * checkpoint) break;
      checkpoint = residual;
    }
  }
  out.iterations = it;
  out.residual = residual;
  out.point.assign(z.data(), z.data() + z.size());
  if (residual < options.feasible_below) {
    out.status = Feasibility::feasible;
  } else if (residual > options.infeasible_above) {
    out.status = Feasibility::infeasible;
  } else {
    out.status = Feasibility::indeterminate;
  }
  return out;
}

}  // namespace bdsc
