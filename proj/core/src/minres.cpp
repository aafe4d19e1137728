#include "mks/minres.hpp"

#include <cmath>
#include <limits>

namespace mks {

MinresResult minres(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& apply,
    const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol, int max_iter) {
    const auto n = b.size();
    x = Eigen::VectorXd::Zero(n);

    MinresResult result;
    const double beta1 = b.norm();
    if (beta1 == 0.0) {
        result.converged = true;
        return result;
    }

    constexpr double eps = std::numeric_limits<double>::epsilon();

    Eigen::VectorXd r1 = b;
    Eigen::VectorXd r2 = b;
    Eigen::VectorXd y = b;
    Eigen::VectorXd v(n), w = Eigen::VectorXd::Zero(n),
                    w1 = Eigen::VectorXd::Zero(n), w2 = Eigen::VectorXd::Zero(n);

    double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0;
    double phibar = beta1, cs = -1.0, sn = 0.0;

    int itn = 0;
    while (itn < max_iter) {
        ++itn;
        v = y / beta;
        apply(v, y);
        if (itn >= 2) y -= (beta / oldb) * r1;
        const double alfa = v.dot(y);
        y -= (alfa / beta) * r2;
        r1.swap(r2);
        r2 = y;
        oldb = beta;
        beta = y.norm();

        // Plane rotations updating the QR factorization of the tridiagonal.
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::sqrt(gbar * gbar + beta * beta);
        gamma = std::max(gamma, eps);
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        w1.swap(w2);
        w2.swap(w);
        w = (v - oldeps * w1 - delta * w2) / gamma;
        x += phi * w;

        if (phibar <= tol * beta1) {
            result.converged = true;
            break;
        }
        if (beta <= eps * beta1) {
            // Krylov space exhausted (exact solution reached).
            result.converged = phibar <= tol * beta1 * 10.0;
            break;
        }
    }

    result.iterations = itn;
    result.relative_residual = phibar / beta1;
    return result;
}

} // namespace mks
