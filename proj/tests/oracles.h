#pragma once

// Reference values computed independently of the library: closed forms, a scalar ODE integrator
// and combinatorial recurrences. Nothing here calls into curvbc.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <vector>

namespace oracles {

constexpr double pi = 3.14159265358979323846;

/// Radially symmetric solution of phi'' + 2 phi'/r = -f on the ball r < R with
/// phi'(R) + beta phi(R) = 0: phi = A - f r^2 / 6.
struct RadialRobin
{
    double f = 6.0;
    double beta = 1.0;
    double R = 1.0;

    double boundary_value() const { return f * R / (3.0 * beta); }
    double centre_value() const { return boundary_value() + f * R * R / 6.0; }
    double operator()(double r) const { return centre_value() - f * r * r / 6.0; }
    double derivative(double r) const { return -f * r / 3.0; }
};

///
/// Shooting solution of the same ODE: RK4 from a series start near r = 0 for two centre values,
/// then the Robin condition fixes the linear combination. Returns phi at the requested radii.
///
inline std::vector<double> radial_robin_rk4(double f, double beta, double R, const std::vector<double>& radii, int steps = 4000)
{
    auto shoot = [&](double centre) {
        // State (phi, phi'); the series phi = c - f r^2/6 starts the integration off the singular point.
        const double r0 = 1e-6 * R;
        std::array<double, 2> y{centre - f * r0 * r0 / 6.0, -f * r0 / 3.0};
        auto rhs = [&](double r, const std::array<double, 2>& s) {
            return std::array<double, 2>{s[1], -f - 2.0 * s[1] / r};
        };
        std::vector<std::pair<double, std::array<double, 2>>> path{{r0, y}};
        const double h = (R - r0) / steps;
        double r = r0;
        for (int i = 0; i < steps; ++i) {
            auto add = [](const std::array<double, 2>& a, const std::array<double, 2>& b, double s) {
                return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
            };
            const auto k1 = rhs(r, y);
            const auto k2 = rhs(r + h / 2, add(y, k1, h / 2));
            const auto k3 = rhs(r + h / 2, add(y, k2, h / 2));
            const auto k4 = rhs(r + h, add(y, k3, h));
            for (int c = 0; c < 2; ++c) y[c] += h / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
            r += h;
            path.push_back({r, y});
        }
        return path;
    };
    const auto a = shoot(0.0);
    const auto b = shoot(1.0);
    // Robin residual is affine in the centre value.
    const double ra = a.back().second[1] + beta * a.back().second[0];
    const double rb = b.back().second[1] + beta * b.back().second[0];
    const double centre = -ra / (rb - ra);

    std::vector<double> out;
    for (double q : radii) {
        size_t i = 1;
        while (i + 1 < a.size() && a[i].first < q) ++i;
        const double t = (q - a[i - 1].first) / (a[i].first - a[i - 1].first);
        auto phi = [&](size_t j) { return a[j].second[0] + centre * (b[j].second[0] - a[j].second[0]); };
        out.push_back((1 - t) * phi(i - 1) + t * phi(i));
    }
    return out;
}

/// Vertex, edge and face counts of an icosahedron split `level` times (each face into four).
struct MeshCounts
{
    long vertices = 12;
    long edges = 30;
    long faces = 20;
};

inline MeshCounts icosphere_counts(int level)
{
    MeshCounts c;
    for (int i = 0; i < level; ++i) {
        c = {c.vertices + c.edges, 2 * c.edges + 3 * c.faces, 4 * c.faces};
    }
    return c;
}

/// Volume enclosed by a closed, outward oriented triangle soup (divergence theorem).
inline double enclosed_volume(const std::vector<Eigen::Vector3d>& x, const std::vector<std::array<int, 3>>& faces)
{
    double v = 0.0;
    for (const auto& f : faces) v += x[f[0]].dot(x[f[1]].cross(x[f[2]])) / 6.0;
    return v;
}

/// Mean curvature of the torus (R cos u + r cos v cos u, ...), outward normal, at tube angle v.
inline double torus_mean_curvature(double R, double r, double v)
{
    return (R + 2.0 * r * std::cos(v)) / (2.0 * r * (R + r * std::cos(v)));
}

inline double ball_volume(double R) { return 4.0 * pi * R * R * R / 3.0; }
inline double sphere_area(double R) { return 4.0 * pi * R * R; }

/// 2 sigma H (1 - delta H), delta = 2 tau / sigma.
inline double tolman(double sigma, double tau, double H)
{
    return 2.0 * sigma * H * (1.0 - 2.0 * tau / sigma * H);
}

/// 1/2 lambda (tr e)^2 + mu tr(e^2) for a symmetric strain e.
inline double elastic_energy(double lambda, double mu, const Eigen::Matrix3d& e)
{
    return 0.5 * lambda * e.trace() * e.trace() + mu * (e * e).trace();
}

} // namespace oracles
