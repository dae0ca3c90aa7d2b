#pragma once

// Dense bounded-variable simplex for small linear programs
//   maximize cᵀx  subject to  A x = b,  0 <= x <= upper  (upper may be +inf).
// Two phases with artificial variables and Bland's rule, so it terminates on
// degenerate problems.

#include <Eigen/Dense>

namespace czvar {

struct BoundedLP {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    Eigen::VectorXd upper;
};

struct LPResult {
    enum class Status { optimal, infeasible, unbounded };
    Status status = Status::infeasible;
    double value = 0;
    Eigen::VectorXd x;
    int iterations = 0;
};

LPResult solve_bounded_lp(const BoundedLP& lp, double tol = 1e-11);

}  // namespace czvar
