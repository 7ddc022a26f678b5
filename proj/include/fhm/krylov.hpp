#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace fhm {

struct GmresOptions {
    /// Converged when the true residual satisfies max_i |r_i| <= abs_tol.
    double abs_tol = 1e-10;
    int max_iters = 1000;
    int restart = 60;
};

struct GmresResult {
    bool converged = false;
    int iterations = 0;
    /// Estimated 2-norm residual after every inner iteration.
    std::vector<double> history;
    /// True residual max-norm at the end.
    double residual_max = 0.0;
};

/// Restarted GMRES with right preconditioning, so the minimized residual is
/// the residual of the original system. Vectors are real. The stopping test
/// uses the max-norm of the true residual, recomputed at the end of each cycle.
class Gmres {
public:
    using Vec = Eigen::VectorXd;
    using Operator = std::function<void(const Vec&, Vec&)>;

    Gmres(Operator apply, Operator precondition, GmresOptions options)
        : apply_(std::move(apply)), precondition_(std::move(precondition)), options_(options)
    {}

    /// Solves A x = b starting from the given x.
    GmresResult solve(const Vec& b, Vec& x) const
    {
        GmresResult res;
        const Eigen::Index n = b.size();
        const int m = std::max(1, options_.restart);
        const double tol = options_.abs_tol;
        const double loose = tol * std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1)));
        bool strict_only = false;

        Vec r(n), w(n), z(n);
        std::vector<Vec> basis;
        Eigen::MatrixXd hess(m + 1, m);
        Eigen::VectorXd cs(m), sn(m), g(m + 1);

        auto true_residual = [&]() {
            apply_(x, w);
            r = b - w;
            return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
        };

        double rmax = true_residual();
        double prev_cycle = r.norm();
        while (true) {
            res.residual_max = rmax;
            if (rmax <= tol) {
                res.converged = true;
                return res;
            }
            if (res.iterations >= options_.max_iters)
                return res;

            const double beta = r.norm();
            if (beta == 0.0) {
                res.converged = true;
                return res;
            }
            basis.assign(1, r / beta);
            hess.setZero();
            g.setZero();
            g(0) = beta;
            int k = 0;
            for (; k < m && res.iterations < options_.max_iters; ++k) {
                precondition_(basis[k], z);
                apply_(z, w);
                for (int i = 0; i <= k; ++i) {
                    hess(i, k) = basis[i].dot(w);
                    w -= hess(i, k) * basis[i];
                }
                // One reorthogonalization pass keeps the basis usable near machine precision.
                for (int i = 0; i <= k; ++i) {
                    const double c = basis[i].dot(w);
                    hess(i, k) += c;
                    w -= c * basis[i];
                }
                hess(k + 1, k) = w.norm();
                for (int i = 0; i < k; ++i) {
                    const double t = cs(i) * hess(i, k) + sn(i) * hess(i + 1, k);
                    hess(i + 1, k) = -sn(i) * hess(i, k) + cs(i) * hess(i + 1, k);
                    hess(i, k) = t;
                }
                const double denom = std::hypot(hess(k, k), hess(k + 1, k));
                cs(k) = denom == 0.0 ? 1.0 : hess(k, k) / denom;
                sn(k) = denom == 0.0 ? 0.0 : hess(k + 1, k) / denom;
                const double hk1 = hess(k + 1, k);
                hess(k, k) = cs(k) * hess(k, k) + sn(k) * hk1;
                hess(k + 1, k) = 0.0;
                g(k + 1) = -sn(k) * g(k);
                g(k) = cs(k) * g(k);
                ++res.iterations;
                const double est = std::abs(g(k + 1));
                res.history.push_back(est);
                if (est <= tol || (!strict_only && est <= loose)) {
                    ++k;
                    break;
                }
                const double hnorm = std::abs(w.norm());
                if (hnorm == 0.0) {
                    ++k;
                    break;
                }
                basis.push_back(w / hnorm);
            }
            // x += M^{-1} V y
            Eigen::VectorXd y = hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
            Vec update = Vec::Zero(n);
            for (int i = 0; i < k; ++i)
                update += y(i) * basis[i];
            precondition_(update, z);
            x += z;
            rmax = true_residual();
            const double cycle = r.norm();
            if (rmax > tol)
                strict_only = true;
            if (cycle >= 0.9999 * prev_cycle && rmax > tol) {
                // Stagnated cycle.
                res.residual_max = rmax;
                return res;
            }
            prev_cycle = cycle;
        }
    }

private:
    Operator apply_;
    Operator precondition_;
    GmresOptions options_;
};

}  // namespace fhm
