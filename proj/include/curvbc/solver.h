#pragma once

#include <curvbc/variational_engine.h>

#include <string>
#include <vector>

namespace curvbc {

struct SolveOptions
{
    /// Stop when the action gradient max-norm is at most this.
    double tolerance = 1e-10;
    /// Newton iterations (a quadratic problem needs one).
    int max_iterations = 50;
    /// Conjugate-gradient iterations per linear solve; 0 means 10 x unknowns.
    int max_linear_iterations = 0;
    /// Remove constant (and, for k = 3, rigid rotation) null modes by pinning their dual-volume
    /// weighted mean to zero. Without it a singular problem is an error.
    bool gauge = false;
};

struct SolveResult
{
    FieldState state;
    std::vector<std::string> log;
    int iterations = 0;
    int linear_iterations = 0;
    double gradient_max_norm = 0.0;
    /// Number of null modes found (and gauged).
    int null_modes = 0;
};

///
/// Stationary point of the rate-independent discrete action. Quadratic problems take one
/// Jacobi-preconditioned conjugate-gradient solve of the assembled Hessian system; others use
/// Newton steps with Armijo backtracking (constant 1e-4) on the action.
///
/// Throws SingularProblemError for an ungauged null space or data incompatible with it, and
/// ConvergenceError (carrying the log) when the tolerance is not reached.
///
SolveResult solve_stationary(const TetMesh& mesh, const BulkLagrangian& bulk, const SurfaceLagrangian& surf,
    const FieldState& initial, const SolveOptions& options = {});

} // namespace curvbc
