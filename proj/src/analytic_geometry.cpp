#include <curvbc/analytic_geometry.h>
#include <curvbc/errors.h>

#include <cmath>
#include <numbers>

namespace curvbc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct ParameterizationDerivatives
{
    Vec3 x, xu, xv, xuu, xuv, xvv, n, nu, nv;
    double H;
    Eigen::Vector2d dH;
};

ParameterizationDerivatives differentiate(const AnalyticSurface& s, double u, double v)
{
    ParameterizationDerivatives d;
    const double cu = std::cos(u), su = std::sin(u), cv = std::cos(v), sv = std::sin(v);
    switch (s.kind()) {
    case SurfaceKind::sphere: {
        const double R = s.radius();
        // u = theta, v = phi
        d.x = R * Vec3(su * cv, su * sv, cu);
        d.xu = R * Vec3(cu * cv, cu * sv, -su);
        d.xv = R * Vec3(-su * sv, su * cv, 0.0);
        d.xuu = -d.x;
        d.xuv = R * Vec3(-cu * sv, cu * cv, 0.0);
        d.xvv = R * Vec3(-su * cv, -su * sv, 0.0);
        d.n = d.x / R;
        d.nu = d.xu / R;
        d.nv = d.xv / R;
        d.H = 1.0 / R;
        d.dH.setZero();
        break;
    }
    case SurfaceKind::cylinder: {
        const double R = s.radius();
        // u = azimuth, v = height
        d.x = Vec3(R * cu, R * su, v);
        d.xu = Vec3(-R * su, R * cu, 0.0);
        d.xv = Vec3::UnitZ();
        d.xuu = Vec3(-R * cu, -R * su, 0.0);
        d.xuv.setZero();
        d.xvv.setZero();
        d.n = Vec3(cu, su, 0.0);
        d.nu = Vec3(-su, cu, 0.0);
        d.nv.setZero();
        d.H = 0.5 / R;
        d.dH.setZero();
        break;
    }
    case SurfaceKind::torus: {
        const double R = s.radius();
        const double r = s.second_parameter();
        const double rho = R + r * cv;
        d.x = Vec3(rho * cu, rho * su, r * sv);
        d.xu = Vec3(-rho * su, rho * cu, 0.0);
        d.xv = Vec3(-r * sv * cu, -r * sv * su, r * cv);
        d.xuu = Vec3(-rho * cu, -rho * su, 0.0);
        d.xuv = Vec3(r * sv * su, -r * sv * cu, 0.0);
        d.xvv = Vec3(-r * cv * cu, -r * cv * su, -r * sv);
        d.n = Vec3(cv * cu, cv * su, sv);
        d.nu = Vec3(-cv * su, cv * cu, 0.0);
        d.nv = Vec3(-sv * cu, -sv * su, cv);
        d.H = (R + 2.0 * r * cv) / (2.0 * r * rho);
        d.dH = Eigen::Vector2d(0.0, -R * sv / (2.0 * rho * rho));
        break;
    }
    }
    return d;
}

void check_components(const StressCoefficients& c, const char* name)
{
    const auto k = c.values.cols();
    if (c.values.rows() != 2 || (k != 1 && k != 3)) {
        throw DimensionError(std::string(name) + " must be 2 x k with k in {1, 3}");
    }
    for (const auto& d : c.derivatives) {
        if (d.rows() != 2 || d.cols() != k) {
            throw DimensionError(std::string(name) + " derivative arrays must match its values");
        }
    }
}

StressDivergenceTerms divergence_terms(const GeometryJet& jet, const StressCoefficients& c)
{
    StressDivergenceTerms t;
    t.components = c.components();
    const auto& G = jet.christoffel;
    if (t.components == 1) {
        for (int A = 0; A < 2; ++A) {
            t.scalar_partial_divergence += c.derivatives[A](A, 0);
            t.scalar_curvature_gradient += c.values(A, 0) * jet.mean_curvature_derivative[A];
            for (int B = 0; B < 2; ++B) t.scalar_trace_connection += c.values(B, 0) * G[A](B, A);
        }
        return t;
    }
    for (int C = 0; C < 2; ++C) {
        for (int A = 0; A < 2; ++A) {
            t.partial_divergence[C] += c.derivatives[A](A, C);
            t.normal_coupling[C] += c.values(A, 2) * jet.mixed_curvature(A, C);
            t.curvature_gradient[C] += c.values(A, C) * jet.mean_curvature_derivative[A];
            for (int B = 0; B < 2; ++B) {
                t.trace_connection[C] += c.values(B, C) * G[A](B, A);
                t.connection[C] += c.values(A, B) * G[C](A, B);
            }
        }
    }
    for (int A = 0; A < 2; ++A) {
        t.normal_partial_divergence += c.derivatives[A](A, 2);
        t.normal_curvature_gradient += c.values(A, 2) * jet.mean_curvature_derivative[A];
        for (int B = 0; B < 2; ++B) {
            t.normal_trace_connection += c.values(B, 2) * G[A](B, A);
            t.curvature_contraction += c.values(A, B) * jet.second_form(A, B);
        }
    }
    return t;
}

} // namespace

std::string to_string(SurfaceKind kind)
{
    switch (kind) {
    case SurfaceKind::sphere: return "sphere";
    case SurfaceKind::cylinder: return "cylinder";
    case SurfaceKind::torus: return "torus";
    }
    return "unknown";
}

AnalyticSurface AnalyticSurface::sphere(double radius)
{
    if (!(radius > 0.0)) throw ParameterError("sphere radius must be positive");
    return AnalyticSurface(SurfaceKind::sphere, radius, 0.0);
}

AnalyticSurface AnalyticSurface::cylinder(double radius, double length)
{
    if (!(radius > 0.0) || !(length > 0.0)) {
        throw ParameterError("cylinder radius and length must be positive");
    }
    return AnalyticSurface(SurfaceKind::cylinder, radius, length);
}

AnalyticSurface AnalyticSurface::torus(double major_radius, double minor_radius)
{
    if (!(minor_radius > 0.0) || !(major_radius > minor_radius)) {
        throw ParameterError("torus requires major radius > minor radius > 0");
    }
    return AnalyticSurface(SurfaceKind::torus, major_radius, minor_radius);
}

bool AnalyticSurface::contains(double u, double v) const
{
    if (!std::isfinite(u) || !std::isfinite(v)) return false;
    switch (m_kind) {
    case SurfaceKind::sphere: return u > 0.0 && u < std::numbers::pi && v >= 0.0 && v <= two_pi;
    case SurfaceKind::cylinder: return u >= 0.0 && u <= two_pi && v >= 0.0 && v <= m_b;
    case SurfaceKind::torus: return u >= 0.0 && u <= two_pi && v >= 0.0 && v <= two_pi;
    }
    return false;
}

Vec3 GeometryJet::mean_curvature_gradient() const
{
    const Eigen::Vector2d up = inverse_metric * mean_curvature_derivative;
    return up[0] * tangents[0] + up[1] * tangents[1];
}

Vec3 GeometryJet::adapted_components(const Vec3& w) const
{
    const Eigen::Vector2d lower(w.dot(tangents[0]), w.dot(tangents[1]));
    const Eigen::Vector2d up = inverse_metric * lower;
    return Vec3(up[0], up[1], w.dot(inward_normal()));
}

Vec3 GeometryJet::ambient_vector(const Vec3& c) const
{
    return c[0] * tangents[0] + c[1] * tangents[1] + c[2] * inward_normal();
}

GeometryJet evaluate_jet(const AnalyticSurface& surface, double u, double v)
{
    if (!surface.contains(u, v)) {
        throw ParameterError("parameter (" + std::to_string(u) + ", " + std::to_string(v)
            + ") outside the " + to_string(surface.kind()) + " chart");
    }
    const auto d = differentiate(surface, u, v);
    GeometryJet jet;
    jet.u = u;
    jet.v = v;
    jet.position = d.x;
    jet.tangents = {d.xu, d.xv};
    jet.normal = d.n;
    jet.second_derivatives = {d.xuu, d.xuv, d.xvv};
    jet.normal_derivatives = {d.nu, d.nv};
    jet.mean_curvature = d.H;
    jet.mean_curvature_derivative = d.dH;

    for (int A = 0; A < 2; ++A) {
        for (int B = 0; B < 2; ++B) {
            jet.metric(A, B) = jet.tangents[A].dot(jet.tangents[B]);
            jet.second_form(A, B) = -d.n.dot(jet.second_derivative(A, B));
        }
    }
    jet.inverse_metric = jet.metric.inverse();
    jet.mixed_curvature = jet.second_form * jet.inverse_metric;
    for (int C = 0; C < 2; ++C) {
        for (int A = 0; A < 2; ++A) {
            for (int B = 0; B < 2; ++B) {
                double g = 0.0;
                for (int D = 0; D < 2; ++D) {
                    g += jet.inverse_metric(C, D) * jet.second_derivative(A, B).dot(jet.tangents[D]);
                }
                jet.christoffel[C](A, B) = g;
            }
        }
    }
    return jet;
}

SampledSurface sample_mesh(const AnalyticSurface& surface, int res_u, int res_v)
{
    if (res_u < 4 || res_v < 4) {
        throw ParameterError("sample_mesh resolution must be at least 4 in each direction");
    }
    std::vector<Vec3> vertices;
    std::vector<Eigen::Vector2d> params;
    std::vector<std::optional<GeometryJet>> jets;
    std::vector<Triangle> faces;

    auto add_chart_vertex = [&](double u, double v) {
        const auto jet = evaluate_jet(surface, u, v);
        vertices.push_back(jet.position);
        params.emplace_back(u, v);
        jets.push_back(jet);
        return static_cast<int>(vertices.size()) - 1;
    };
    auto add_vertex = [&](const Vec3& p) {
        vertices.push_back(p);
        params.emplace_back(0.0, 0.0);
        jets.emplace_back(std::nullopt);
        return static_cast<int>(vertices.size()) - 1;
    };

    switch (surface.kind()) {
    case SurfaceKind::sphere: {
        // res_u latitude bands, res_v meridians.
        const double R = surface.radius();
        const int north = add_vertex(Vec3(0, 0, R));
        auto ring = [&](int i, int j) { return 1 + (i - 1) * res_v + (j % res_v); };
        for (int i = 1; i < res_u; ++i) {
            for (int j = 0; j < res_v; ++j) {
                add_chart_vertex(std::numbers::pi * i / res_u, two_pi * j / res_v);
            }
        }
        const int south = add_vertex(Vec3(0, 0, -R));
        for (int j = 0; j < res_v; ++j) {
            faces.push_back({north, ring(1, j), ring(1, j + 1)});
            faces.push_back({ring(res_u - 1, j), south, ring(res_u - 1, j + 1)});
        }
        for (int i = 1; i + 1 < res_u; ++i) {
            for (int j = 0; j < res_v; ++j) {
                const int a = ring(i, j), b = ring(i + 1, j), c = ring(i + 1, j + 1), d = ring(i, j + 1);
                faces.push_back({a, b, c});
                faces.push_back({a, c, d});
            }
        }
        break;
    }
    case SurfaceKind::cylinder: {
        // res_u around, res_v segments along the axis, fan caps.
        const double L = surface.second_parameter();
        auto idx = [&](int j, int k) { return k * res_u + (j % res_u); };
        for (int k = 0; k <= res_v; ++k) {
            for (int j = 0; j < res_u; ++j) add_chart_vertex(two_pi * j / res_u, L * k / res_v);
        }
        const int bottom = add_vertex(Vec3(0, 0, 0));
        const int top = add_vertex(Vec3(0, 0, L));
        for (int k = 0; k < res_v; ++k) {
            for (int j = 0; j < res_u; ++j) {
                const int a = idx(j, k), b = idx(j + 1, k), c = idx(j + 1, k + 1), d = idx(j, k + 1);
                faces.push_back({a, b, c});
                faces.push_back({a, c, d});
            }
        }
        for (int j = 0; j < res_u; ++j) {
            faces.push_back({bottom, idx(j + 1, 0), idx(j, 0)});
            faces.push_back({top, idx(j, res_v), idx(j + 1, res_v)});
        }
        break;
    }
    case SurfaceKind::torus: {
        auto idx = [&](int i, int j) { return (i % res_u) * res_v + (j % res_v); };
        for (int i = 0; i < res_u; ++i) {
            for (int j = 0; j < res_v; ++j) add_chart_vertex(two_pi * i / res_u, two_pi * j / res_v);
        }
        for (int i = 0; i < res_u; ++i) {
            for (int j = 0; j < res_v; ++j) {
                const int a = idx(i, j), b = idx(i + 1, j), c = idx(i + 1, j + 1), d = idx(i, j + 1);
                faces.push_back({a, b, c});
                faces.push_back({a, c, d});
            }
        }
        break;
    }
    }

    return SampledSurface{
        TriangleMesh(std::move(vertices), std::move(faces)), std::move(params), std::move(jets)};
}

StressCoefficients StressCoefficients::constant(const Eigen::MatrixXd& values)
{
    StressCoefficients c;
    c.values = values;
    c.derivatives = {Eigen::MatrixXd::Zero(values.rows(), values.cols()),
        Eigen::MatrixXd::Zero(values.rows(), values.cols())};
    return c;
}

Eigen::VectorXd StressDivergenceTerms::divergence() const
{
    if (components == 1) {
        return Eigen::VectorXd::Constant(1, scalar_partial_divergence + scalar_trace_connection);
    }
    Eigen::VectorXd d(3);
    d.head<2>() = partial_divergence + trace_connection + connection - normal_coupling;
    d[2] = normal_partial_divergence + normal_trace_connection + curvature_contraction;
    return d;
}

Eigen::VectorXd StressDivergenceTerms::contraction_with_curvature_gradient() const
{
    if (components == 1) return Eigen::VectorXd::Constant(1, scalar_curvature_gradient);
    Eigen::VectorXd d(3);
    d.head<2>() = curvature_gradient;
    d[2] = normal_curvature_gradient;
    return d;
}

Eigen::VectorXd ExpansionTerms::bc_rhs(
    const Eigen::VectorXd& gamma_bar_gradient, const Eigen::VectorXd& gamma_hat_gradient) const
{
    if (gamma_bar_gradient.size() != chi.components || gamma_hat_gradient.size() != chi.components) {
        throw DimensionError("potential gradients must have one entry per field component");
    }
    const double H = mean_curvature;
    return chi.divergence() - gamma_bar_gradient + 2.0 * H * (gamma_hat_gradient - kappa.divergence())
        - 2.0 * kappa.contraction_with_curvature_gradient();
}

double ExpansionTerms::flipped_normal_row(double gamma_bar_derivative, double gamma_hat_derivative) const
{
    const double H = mean_curvature;
    return chi.normal_partial_divergence + chi.normal_trace_connection + chi.curvature_contraction
        - gamma_bar_derivative
        + 2.0 * H
        * (gamma_hat_derivative - kappa.normal_partial_divergence + kappa.normal_trace_connection
            + kappa.curvature_contraction)
        - 2.0 * kappa.normal_curvature_gradient;
}

ExpansionTerms expansion_terms(
    const GeometryJet& jet, const StressCoefficients& chi, const StressCoefficients& kappa)
{
    check_components(chi, "chi");
    check_components(kappa, "kappa");
    if (chi.components() != kappa.components()) {
        throw DimensionError("chi and kappa must have the same number of field components");
    }
    ExpansionTerms terms;
    terms.chi = divergence_terms(jet, chi);
    terms.kappa = divergence_terms(jet, kappa);
    terms.mean_curvature = jet.mean_curvature;
    return terms;
}

Eigen::VectorXd frame_free_divergence(const GeometryJet& jet, const StressCoefficients& chi)
{
    check_components(chi, "chi");
    // d_A ln sqrt(g) = g^BC x_,AB . x_,C
    Eigen::Vector2d log_area_rate = Eigen::Vector2d::Zero();
    for (int A = 0; A < 2; ++A) {
        for (int B = 0; B < 2; ++B) {
            for (int C = 0; C < 2; ++C) {
                log_area_rate[A] += jet.inverse_metric(B, C)
                    * jet.second_derivative(A, B).dot(jet.tangents[C]);
            }
        }
    }

    if (chi.components() == 1) {
        double div = 0.0;
        for (int A = 0; A < 2; ++A) {
            div += chi.derivatives[A](A, 0) + chi.values(A, 0) * log_area_rate[A];
        }
        return Eigen::VectorXd::Constant(1, div);
    }

    const Vec3 g3 = jet.inward_normal();
    Vec3 div = Vec3::Zero();
    for (int A = 0; A < 2; ++A) {
        const Vec3 dg3 = -jet.normal_derivatives[A];
        Vec3 vA = chi.values(A, 2) * g3;
        Vec3 dvA = chi.derivatives[A](A, 2) * g3 + chi.values(A, 2) * dg3;
        for (int C = 0; C < 2; ++C) {
            vA += chi.values(A, C) * jet.tangents[C];
            dvA += chi.derivatives[A](A, C) * jet.tangents[C]
                + chi.values(A, C) * jet.second_derivative(A, C);
        }
        div += dvA + log_area_rate[A] * vA;
    }
    return div;
}

} // namespace curvbc
