#include <curvbc/solver.h>

#include <curvbc/errors.h>

#include <Eigen/QR>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace curvbc {

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& m)
{
    Eigen::VectorXd out(m.size());
    const auto k = m.cols();
    for (Eigen::Index v = 0; v < m.rows(); ++v) {
        for (Eigen::Index c = 0; c < k; ++c) {
            out(v * k + c) = m(v, c);
        }
    }
    return out;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& x, int k)
{
    const auto n = x.size() / k;
    Eigen::MatrixXd out(n, k);
    for (Eigen::Index v = 0; v < n; ++v) {
        for (int c = 0; c < k; ++c) {
            out(v, c) = x(v * k + c);
        }
    }
    return out;
}

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0)
{
    char buf[256];
    std::snprintf(buf, sizeof(buf), fmt, a, b, c);
    return buf;
}

std::string join(const std::vector<std::string>& lines)
{
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

/// Constant modes per component, plus rigid rotations for k = 3, that the Hessian annihilates.
Eigen::MatrixXd find_null_modes(const TetMesh& mesh, const Eigen::SparseMatrix<double>& H, int k)
{
    const int n = mesh.num_vertices();
    std::vector<Eigen::VectorXd> candidates;
    for (int c = 0; c < k; ++c) {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(n * k);
        for (int v = 0; v < n; ++v) z(v * k + c) = 1.0;
        candidates.push_back(z);
    }
    if (k == 3) {
        for (int a = 0; a < 3; ++a) {
            Eigen::VectorXd z(n * k);
            for (int v = 0; v < n; ++v) {
                z.segment<3>(v * 3) = Vec3::Unit(a).cross(mesh.position(v));
            }
            candidates.push_back(z);
        }
    }

    double norm = 0.0;
    for (int col = 0; col < H.outerSize(); ++col) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(H, col); it; ++it) sum += std::abs(it.value());
        norm = std::max(norm, sum);
    }

    std::vector<Eigen::VectorXd> null;
    for (const auto& z : candidates) {
        if ((H * z).norm() <= 1e-8 * norm * z.norm()) null.push_back(z);
    }
    Eigen::MatrixXd Z(n * k, static_cast<Eigen::Index>(null.size()));
    for (size_t j = 0; j < null.size(); ++j) Z.col(static_cast<Eigen::Index>(j)) = null[j];
    return Z;
}

/// Remove the dual-volume weighted projection onto the null modes.
void apply_gauge(Eigen::VectorXd& x, const Eigen::MatrixXd& Z, const Eigen::VectorXd& weights)
{
    if (Z.cols() == 0) return;
    const Eigen::MatrixXd WZ = weights.asDiagonal() * Z;
    const Eigen::VectorXd coeff = (Z.transpose() * WZ).ldlt().solve(WZ.transpose() * x);
    x -= Z * coeff;
}

struct CgResult
{
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0.0;
    bool indefinite = false;
};

/// Jacobi-preconditioned CG on the complement of span(Q) (Q orthonormal).
CgResult projected_cg(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, const Eigen::MatrixXd& Q,
    double target, int max_iterations)
{
    auto project = [&](Eigen::VectorXd& v) {
        if (Q.cols()) v -= Q * (Q.transpose() * v);
    };
    Eigen::VectorXd inv_diag = A.diagonal();
    for (Eigen::Index i = 0; i < inv_diag.size(); ++i) {
        inv_diag(i) = inv_diag(i) > 0.0 ? 1.0 / inv_diag(i) : 1.0;
    }

    CgResult out;
    out.x = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b;
    project(r);
    out.residual = r.lpNorm<Eigen::Infinity>();
    if (out.residual <= target) return out;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    project(z);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    for (int it = 0; it < max_iterations; ++it) {
        const Eigen::VectorXd Ap = A * p;
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0)) {
            out.indefinite = true;
            break;
        }
        const double alpha = rz / pAp;
        out.x += alpha * p;
        r -= alpha * Ap;
        project(r);
        out.iterations = it + 1;
        out.residual = r.lpNorm<Eigen::Infinity>();
        if (out.residual <= target) break;
        z = inv_diag.cwiseProduct(r);
        project(z);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    return out;
}

} // namespace

SolveResult solve_stationary(const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf,
    const FieldState& initial, const SolveOptions& options)
{
    if (initial.trajectory || bulk.rate_dependent() || surf.rate_dependent()) {
        throw ParameterError("solve_stationary needs a rate-independent problem without a trajectory");
    }
    if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
        throw ParameterError("solver tolerance and iteration limit must be positive");
    }
    const int k = bulk.components();
    initial.validate(mesh.num_vertices(), k);
    const bool quadratic = bulk.is_quadratic() && surf.is_quadratic();
    const int n = mesh.num_vertices() * k;
    const int max_linear = options.max_linear_iterations > 0 ? options.max_linear_iterations : 10 * n;

    Eigen::VectorXd weights(n);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        weights.segment(v * k, k).setConstant(mesh.dual_volume(v));
    }

    SolveResult result;
    result.state = initial;
    auto& log = result.log;
    Eigen::VectorXd x = flatten(initial.values);
    auto state_of = [&](const Eigen::VectorXd& y) {
        FieldState s;
        s.values = unflatten(y, k);
        return s;
    };

    bool gauged = false;
    for (int iter = 0;; ++iter) {
        const FieldState state = state_of(x);
        const Eigen::VectorXd g = flatten(action_gradient(mesh, bulk, surf, state));
        const double gnorm = g.lpNorm<Eigen::Infinity>();
        const double action = assemble_action(mesh, bulk, surf, state).total;
        log.push_back(format("iter %.0f action=%.16e grad_inf=%.6e", iter, action, gnorm));

        const Eigen::SparseMatrix<double> H = action_hessian(mesh, bulk, surf, state);
        const Eigen::MatrixXd Z = find_null_modes(mesh, H, k);
        Eigen::MatrixXd Q(n, 0);
        bool flat = false;
        if (Z.cols() > 0) {
            Q = Eigen::HouseholderQR<Eigen::MatrixXd>(Z).householderQ() * Eigen::MatrixXd::Identity(n, Z.cols());
            const double incompatibility = (Q.transpose() * g).norm();
            const bool incompatible = incompatibility > 1e-8 * g.norm() + 1e-3 * options.tolerance;
            // An invariance of the action keeps the gradient orthogonal to it, so a non-quadratic
            // action with gradient along the modes is only flat at this iterate.
            flat = incompatible && !quadratic;
            if (flat) {
                Q.resize(n, 0);
                log.push_back(format("hessian flat along %.0f modes at this iterate", static_cast<double>(Z.cols())));
            }
        }
        if (Z.cols() > 0 && !flat) {
            result.null_modes = static_cast<int>(Z.cols());
            const double incompatibility = (Q.transpose() * g).norm();
            if (incompatibility > 1e-8 * g.norm() + 1e-3 * options.tolerance) {
                std::ostringstream msg;
                msg << "data incompatible with the " << Z.cols()
                    << "-dimensional null space of the stationarity system (projection "
                    << incompatibility << ")";
                throw SingularProblemError(msg.str());
            }
            if (!options.gauge) {
                std::ostringstream msg;
                msg << "stationarity system has a " << Z.cols()
                    << "-dimensional null space (constant or rigid modes); enable the gauge";
                throw SingularProblemError(msg.str());
            }
            if (!gauged) {
                apply_gauge(x, Z, weights);
                gauged = true;
                log.push_back(format("gauge: pinned %.0f null modes", static_cast<double>(Z.cols())));
                continue;
            }
        }

        if (gnorm <= options.tolerance) {
            result.iterations = iter;
            result.gradient_max_norm = gnorm;
            result.state = state;
            log.push_back(format("converged grad_inf=%.6e", gnorm));
            return result;
        }
        if (iter >= options.max_iterations) {
            log.push_back("iteration limit reached");
            throw ConvergenceError("stationary solve did not converge", join(log));
        }

        const double target = quadratic ? 0.1 * options.tolerance : std::max(0.1 * options.tolerance, 1e-6 * gnorm);
        Eigen::VectorXd step = -g;
        bool descent = !flat;
        if (!flat) {
            const CgResult cg = projected_cg(H, -g, Q, target, max_linear);
            result.linear_iterations += cg.iterations;
            log.push_back(format("cg iterations=%.0f residual=%.6e", cg.iterations, cg.residual));
            step = cg.x;
            descent = !cg.indefinite && step.dot(g) < 0.0;
        }
        if (!descent) {
            if (quadratic) {
                throw SingularProblemError("Hessian of a quadratic action is not positive definite");
            }
            step = -g;
            log.push_back("non-descent Newton direction, using steepest descent");
        }

        if (quadratic) {
            x += step;
        } else {
            double alpha = 1.0;
            const double slope = g.dot(step);
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                const Eigen::VectorXd trial = x + alpha * step;
                const double a = assemble_action(mesh, bulk, surf, state_of(trial)).total;
                const bool roundoff = std::abs(a - action) <= 1e-14 * std::max(1.0, std::abs(action));
                if (a <= action + 1e-4 * alpha * slope || roundoff) {
                    x = trial;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            log.push_back(format("line search step=%.6e", alpha));
            if (!accepted) {
                throw ConvergenceError("line search failed", join(log));
            }
        }
        if (Z.cols() > 0 && !flat) apply_gauge(x, Z, weights);
    }
}

} // namespace curvbc
