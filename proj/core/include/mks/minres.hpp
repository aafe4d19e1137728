#pragma once

#include <Eigen/Core>
#include <functional>

namespace mks {

struct MinresResult {
    int iterations = 0;
    double relative_residual = 0.0; // recurrence estimate ||r|| / ||b||
    bool converged = false;
};

// Matrix-free MINRES (Paige & Saunders) for a symmetric, possibly singular
// operator. For a consistent system with x0 = 0 the iterates stay in the
// Krylov space of b, so singular-but-consistent problems converge to the
// minimum-norm solution. `apply` must compute out = A * in.
MinresResult minres(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int max_iter);

} // namespace mks
