#include <curvbc/tolman.h>

#include <curvbc/errors.h>
#include <curvbc/tet_mesh.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace curvbc {

Eigen::VectorXd reduced_bc_rhs(const SurfaceLagrangian& surf, const BoundaryPointData& data)
{
    if (!surf.restricted) {
        throw ParameterError("reduced boundary condition needs a restricted surface Lagrangian");
    }
    const auto& form = *surf.restricted;
    const auto& p = data.point;
    const auto& phi = data.jet.value;
    const double H = p.mean_curvature;

    Eigen::VectorXd rhs = -form.base.potential.gradient(phi) + 2.0 * H * form.curvature.potential.gradient(phi);
    for (int k = 0; k < static_cast<int>(form.base.stress.size()); ++k) {
        rhs(k) += form.base.stress[k].divergence(p);
    }
    for (int k = 0; k < static_cast<int>(form.curvature.stress.size()); ++k) {
        const auto& kappa = form.curvature.stress[k];
        rhs(k) += -2.0 * H * kappa.divergence(p) - 2.0 * kappa.value(p).dot(data.mean_curvature_gradient);
    }
    return rhs;
}

IsotropicBcValues isotropic_bc_values(
    const IsotropicSurfaceParams& params, double mean_curvature, const Eigen::Vector2d& mean_curvature_gradient)
{
    const double H = mean_curvature;
    return {-2.0 * params.tau * mean_curvature_gradient, 2.0 * params.sigma * H - 4.0 * params.tau * H * H};
}

double tolman_pressure(const IsotropicSurfaceParams& params, double mean_curvature)
{
    return 2.0 * params.sigma * mean_curvature * (1.0 - params.delta() * mean_curvature);
}

std::string TolmanCurve::to_csv() const
{
    std::ostringstream out;
    out << "R,H,dp_tolman,dp_young_laplace,delta_H\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.radius, r.mean_curvature,
            r.dp_tolman, r.dp_young_laplace, r.delta_h);
        out << buf;
    }
    return out.str();
}

TolmanCurve tolman_curve(const IsotropicSurfaceParams& params, const std::vector<double>& radii)
{
    const auto checked = IsotropicSurfaceParams::make(params.sigma, params.tau);
    TolmanCurve curve;
    curve.params = checked;
    const double delta = checked.delta();
    for (size_t i = 0; i < radii.size(); ++i) {
        const double R = radii[i];
        if (!(R > 0.0) || !std::isfinite(R)) {
            throw ParameterError("radius " + std::to_string(R) + " must be positive");
        }
        if (i > 0 && !(R > radii[i - 1])) {
            throw ParameterError("radii must be strictly increasing");
        }
        TolmanRow row;
        row.radius = R;
        row.mean_curvature = 1.0 / R;
        row.delta_h = delta / R;
        row.dp_young_laplace = 2.0 * checked.sigma / R;
        row.dp_tolman = row.dp_young_laplace * (1.0 - row.delta_h);
        curve.rows.push_back(row);
    }
    return curve;
}

Eigen::VectorXd extended_bc_rhs(const SurfaceLagrangian& surf, double delta, const BoundaryPointData& data)
{
    if (surf.base->rate_dependent()) {
        throw MissingDataError("extended boundary condition needs a rate-independent Gamma_0");
    }
    const auto& p = data.point;
    const DensityPartials base = surf.base->evaluate(p, data.jet);
    const Eigen::VectorXd div = surf.base->flux_divergence(p, data.jet);
    return (1.0 - delta * p.mean_curvature) * (div - base.d_value)
        - delta * base.d_gradient * data.mean_curvature_gradient;
}

SurfaceLagrangian with_proportional_curvature(const SurfaceLagrangian& surf, double delta)
{
    SurfaceLagrangian out = surf;
    out.name = surf.name + "+proportional_curvature";
    out.curvature = std::make_shared<ScaledSurfaceDensity>(surf.base, 0.5 * delta);
    out.restricted.reset();
    out.isotropic.reset();
    return out;
}

std::string to_string(ReductionRow::Status status)
{
    switch (status) {
    case ReductionRow::Status::pass:
        return "pass";
    case ReductionRow::Status::fail:
        return "fail";
    case ReductionRow::Status::finding:
        return "finding";
    }
    return "?";
}

bool ReductionReport::passed() const
{
    for (const auto& r : rows) {
        if (r.status == ReductionRow::Status::fail) return false;
    }
    return true;
}

std::string ReductionReport::to_json() const
{
    nlohmann::ordered_json j;
    j["frame"] = frame_note;
    j["passed"] = passed();
    auto& arr = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        arr.push_back({{"name", r.name}, {"description", r.description}, {"max_deviation", r.max_deviation},
            {"tolerance", r.tolerance}, {"samples", r.samples}, {"status", to_string(r.status)}});
    }
    return j.dump(2);
}

std::string ReductionReport::to_text() const
{
    std::ostringstream out;
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-8s %-36s dev=%.3e tol=%.1e n=%d  %s\n", to_string(r.status).c_str(),
            r.name.c_str(), r.max_deviation, r.tolerance, r.samples, r.description.c_str());
        out << buf;
    }
    out << "frame: " << frame_note << '\n';
    return out.str();
}

// ------------------------------------------------------------------------------------------------

double discrete_droplet_pressure(const IsotropicSurfaceParams& params, double radius, int level)
{
    const TetMesh mesh = build_ball_tetmesh(radius, level, 2);
    const BulkLagrangian bulk = linear_elastic_bulk(1.0, 1.0);
    const SurfaceLagrangian surf = make_isotropic_surface(params.sigma, params.tau, 3);

    auto surface_action = [&](double u) {
        FieldState s = FieldState::zeros(mesh.num_vertices(), 3);
        for (int i = 0; i < mesh.num_boundary_vertices(); ++i) {
            s.values.row(mesh.boundary_vertex(i)) = u * mesh.boundary().vertex_normal(i).transpose();
        }
        const ActionBreakdown a = assemble_action(mesh, bulk, surf, s);
        return a.surface_base + a.surface_curvature;
    };
    const double h = 1e-3 * radius;
    return (surface_action(h) - surface_action(-h)) / (2.0 * h) / mesh.boundary().total_area();
}

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b)
{
    return std::uniform_real_distribution<double>(a, b)(rng);
}

GeometryJet random_jet(const AnalyticSurface& surface, Rng& rng)
{
    if (surface.kind() == SurfaceKind::sphere) {
        return evaluate_jet(surface, uniform(rng, 0.3, std::numbers::pi - 0.3), uniform(rng, 0.0, 2.0 * std::numbers::pi));
    }
    return evaluate_jet(surface, uniform(rng, 0.0, 2.0 * std::numbers::pi), uniform(rng, 0.0, 2.0 * std::numbers::pi));
}

BoundaryPointData random_point_data(const GeometryJet& jet, int k, Rng& rng)
{
    BoundaryPointData d;
    d.point = jet.surface_point();
    d.mean_curvature_gradient = jet.mean_curvature_gradient();
    d.jet = FieldJet::zero(k);
    const Eigen::Matrix3d P = d.point.tangent_projector();
    for (int i = 0; i < k; ++i) {
        d.jet.value(i) = uniform(rng, -1.0, 1.0);
        d.jet.gradient.row(i) = (P * Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1))).transpose();
    }
    return d;
}

Eigen::MatrixXd random_matrix(int r, int c, Rng& rng)
{
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = uniform(rng, -1.0, 1.0);
    return m;
}

ScalarPotential random_quadratic(int k, Rng& rng)
{
    return ScalarPotential::quadratic(random_matrix(k, k, rng), random_matrix(k, 1, rng), uniform(rng, -1, 1));
}

AffineTangentField random_affine(Rng& rng)
{
    AffineTangentField f;
    f.offset = random_matrix(3, 1, rng);
    f.linear = random_matrix(3, 3, rng);
    return f;
}

RestrictedChannel random_channel(int k, Rng& rng, bool divergence_free_channel)
{
    RestrictedChannel c;
    c.potential = random_quadratic(k, rng);
    c.channel_potential = uniform(rng, 0, 1) < 0.5 ? random_quadratic(k, rng)
                                                   : ScalarPotential::quartic(k, uniform(rng, -1, 1));
    // Rotations about the symmetry axis (z) of the sphere and torus fixtures are divergence free.
    c.channel_field = divergence_free_channel ? AffineTangentField::rotation(uniform(rng, -1, 1) * Vec3::UnitZ())
                                              : AffineTangentField::constant(random_matrix(3, 1, rng));
    for (int i = 0; i < k; ++i) c.stress.push_back(random_affine(rng));
    return c;
}

SurfaceLagrangian random_restricted(int k, Rng& rng, bool divergence_free_channel = true)
{
    RestrictedForm form;
    form.components = k;
    form.base = random_channel(k, rng, divergence_free_channel);
    form.curvature = random_channel(k, rng, divergence_free_channel);
    return make_restricted_surface(form);
}

double relative(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

double relative(double a, double b)
{
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

/// d_B g^{AC} from the closed-form second derivatives.
std::array<Eigen::Matrix2d, 2> inverse_metric_derivatives(const GeometryJet& jet)
{
    std::array<Eigen::Matrix2d, 2> out;
    for (int b = 0; b < 2; ++b) {
        Eigen::Matrix2d dg;
        for (int d = 0; d < 2; ++d) {
            for (int e = 0; e < 2; ++e) {
                dg(d, e) = jet.second_derivative(b, d).dot(jet.tangents[e])
                    + jet.tangents[d].dot(jet.second_derivative(b, e));
            }
        }
        out[b] = -jet.inverse_metric * dg * jet.inverse_metric;
    }
    return out;
}

/// Isotropic adapted coefficients s g^{AC} (k = 3, no normal components).
StressCoefficients isotropic_coefficients(const GeometryJet& jet, double s)
{
    StressCoefficients c;
    c.values.setZero(2, 3);
    c.values.block<2, 2>(0, 0) = s * jet.inverse_metric;
    const auto d = inverse_metric_derivatives(jet);
    for (int b = 0; b < 2; ++b) {
        c.derivatives[b].setZero(2, 3);
        c.derivatives[b].block<2, 2>(0, 0) = s * d[b];
    }
    return c;
}

SurfaceLagrangian isotropic_with_potentials(double sigma, double tau, const Vec3& bbar, const Vec3& bhat)
{
    RestrictedForm form;
    form.components = 3;
    form.base.potential = ScalarPotential::quadratic(Eigen::Matrix3d::Zero(), bbar);
    form.curvature.potential = ScalarPotential::quadratic(Eigen::Matrix3d::Zero(), bhat);
    form.base.channel_potential = form.curvature.channel_potential = ScalarPotential::zero(3);
    for (int k = 0; k < 3; ++k) {
        form.base.stress.push_back(AffineTangentField::constant(sigma * Vec3::Unit(k)));
        form.curvature.stress.push_back(AffineTangentField::constant(tau * Vec3::Unit(k)));
    }
    return make_restricted_surface(form);
}

ReductionRow make_row(std::string name, std::string description, double deviation, double tolerance, int samples)
{
    ReductionRow r;
    r.name = std::move(name);
    r.description = std::move(description);
    r.max_deviation = deviation;
    r.tolerance = tolerance;
    r.samples = samples;
    r.status = deviation <= tolerance ? ReductionRow::Status::pass : ReductionRow::Status::fail;
    return r;
}

} // namespace

ReductionReport verify_reductions(const ReductionOptions& options)
{
    if (options.samples < 1) {
        throw ParameterError("verify_reductions needs at least one sample");
    }
    Rng rng(options.seed);
    const std::array<AnalyticSurface, 2> fixtures{AnalyticSurface::sphere(1.3), AnalyticSurface::torus(2.0, 0.7)};
    const int n = options.samples;
    ReductionReport report;
    report.frame_note = "adapted vectors use (g_1, g_2, g_3 = -N); tangential droplet components use the "
                        "orthonormal frame e_1 = g_1/|g_1|, e_2 = N x e_1, where the metric-derivative "
                        "terms vanish";

    // General condition vs the restricted form without its channel terms.
    {
        double dev = 0.0, divergent = 0.0;
        int count = 0;
        for (const auto& surface : fixtures) {
            for (int k : {1, 3}) {
                for (int s = 0; s < n; ++s) {
                    const SurfaceLagrangian surf = random_restricted(k, rng);
                    const auto data = random_point_data(random_jet(surface, rng), k, rng);
                    dev = std::max(dev, relative(natural_bc_rhs_at_point(surf, data), reduced_bc_rhs(surf, data)));
                    const SurfaceLagrangian bad = random_restricted(k, rng, false);
                    divergent = std::max(divergent,
                        relative(natural_bc_rhs_at_point(bad, data), reduced_bc_rhs(bad, data)));
                    ++count;
                }
            }
        }
        report.rows.push_back(make_row("general_vs_restricted",
            "general condition equals the restricted form with divergence-free channel fields "
            "(sphere, torus; k = 1, 3)",
            dev, 1e-10, count));
        ReductionRow finding = make_row("restricted_channel_divergence",
            "channel terms survive when the channel field is a projected constant vector "
            "(not divergence free on a curved surface)",
            divergent, 1e-10, count);
        finding.status = ReductionRow::Status::finding;
        report.rows.push_back(finding);
    }

    // Isotropic condition: adapted-frame expansion vs the general condition in adapted components.
    {
        double dev = 0.0, normal_dev = 0.0;
        int count = 0;
        for (const auto& surface : fixtures) {
            for (int s = 0; s < n; ++s) {
                const GeometryJet jet = random_jet(surface, rng);
                const double sigma = uniform(rng, 0.5, 2.0), tau = uniform(rng, -0.5, 0.5);
                const Vec3 bbar = random_matrix(3, 1, rng), bhat = random_matrix(3, 1, rng);
                const SurfaceLagrangian surf = isotropic_with_potentials(sigma, tau, bbar, bhat);
                const auto data = random_point_data(jet, 3, rng);
                const Eigen::VectorXd general = natural_bc_rhs_at_point(surf, data);
                const ExpansionTerms terms = expansion_terms(
                    jet, isotropic_coefficients(jet, sigma), isotropic_coefficients(jet, tau));
                const Eigen::VectorXd adapted = terms.bc_rhs(jet.adapted_components(bbar), jet.adapted_components(bhat));
                dev = std::max(dev, relative(adapted, Eigen::VectorXd(jet.adapted_components(general))));
                // Normal projection of the general condition.
                const double normal = general.dot(jet.inward_normal());
                const double expected = 2.0 * sigma * jet.mean_curvature - bbar.dot(jet.inward_normal())
                    + 2.0 * jet.mean_curvature * (bhat.dot(jet.inward_normal()) - 2.0 * tau * jet.mean_curvature);
                normal_dev = std::max(normal_dev, relative(adapted(2), normal));
                normal_dev = std::max(normal_dev, relative(expected, normal));
                ++count;
            }
        }
        report.rows.push_back(make_row("isotropic_adapted_vs_general",
            "isotropic adapted-frame rows (tangential and normal) equal the general condition", dev, 1e-10, count));
        report.rows.push_back(make_row("isotropic_normal_row_vs_projection",
            "normal row equals the normal projection 2 sigma H - dgamma_bar/dphi.n + 2H(dgamma_hat/dphi.n - 2 tau H)",
            normal_dev, 1e-10, count));
    }

    // Droplet: pressure and tangential condition vs Tolman's formula.
    {
        double dev = 0.0;
        int count = 0;
        for (int s = 0; s < n; ++s) {
            const auto params = IsotropicSurfaceParams::make(uniform(rng, 0.5, 2.0), uniform(rng, -0.5, 0.5));
            const double H = uniform(rng, -2.0, 2.0);
            const Eigen::Vector2d dH = random_matrix(2, 1, rng);
            dev = std::max(dev, relative(isotropic_bc_values(params, H, dH).normal, tolman_pressure(params, H)));
            ++count;
        }
        for (const auto& surface : fixtures) {
            for (int s = 0; s < n; ++s) {
                const auto params = IsotropicSurfaceParams::make(uniform(rng, 0.5, 2.0), uniform(rng, -0.5, 0.5));
                const GeometryJet jet = random_jet(surface, rng);
                const SurfaceLagrangian surf = make_isotropic_surface(params.sigma, params.tau, 3);
                const auto data = random_point_data(jet, 3, rng);
                const Eigen::VectorXd general = natural_bc_rhs_at_point(surf, data);
                const Vec3 e1 = jet.tangents[0].normalized();
                const Vec3 e2 = jet.normal.cross(e1);
                const Vec3 gradH = jet.mean_curvature_gradient();
                const IsotropicBcValues iso
                    = isotropic_bc_values(params, jet.mean_curvature, Eigen::Vector2d(gradH.dot(e1), gradH.dot(e2)));
                dev = std::max(dev, relative(general.dot(jet.inward_normal()), iso.normal));
                dev = std::max(dev, relative(general.dot(jet.inward_normal()), tolman_pressure(params, jet.mean_curvature)));
                dev = std::max(dev,
                    relative(Eigen::VectorXd(Eigen::Vector2d(general.dot(e1), general.dot(e2))),
                        Eigen::VectorXd(iso.tangential)));
                ++count;
            }
        }
        report.rows.push_back(make_row("droplet_vs_tolman",
            "droplet normal value 2 sigma H - 4 tau H^2 equals 2 sigma H (1 - delta H); tangential value "
            "-2 tau grad H (sphere, torus)",
            dev, 1e-10, count));
    }

    // Gamma_hat = delta Gamma_0 / 2 vs the extended Tolman condition.
    {
        double dev = 0.0, tolman_dev = 0.0;
        int count = 0;
        for (const auto& surface : fixtures) {
            for (int s = 0; s < n; ++s) {
                const double delta = uniform(rng, -0.5, 0.5);
                const int kind = s % 4;
                const int k = kind == 1 || kind == 3 ? 1 : 3;
                SurfaceLagrangian surf = kind < 2 ? random_restricted(k, rng)
                                                  : make_isotropic_surface(uniform(rng, 0.5, 2.0), 0.0, k);
                const GeometryJet jet = random_jet(surface, rng);
                const auto data = random_point_data(jet, k, rng);
                const SurfaceLagrangian proportional = with_proportional_curvature(surf, delta);
                dev = std::max(dev, relative(natural_bc_rhs_at_point(proportional, data), extended_bc_rhs(surf, delta, data)));
                if (kind == 2 && surface.kind() == SurfaceKind::sphere) {
                    const auto params = IsotropicSurfaceParams::make(surf.isotropic->sigma, 0.5 * delta * surf.isotropic->sigma);
                    tolman_dev = std::max(tolman_dev,
                        relative(extended_bc_rhs(surf, delta, data).dot(jet.inward_normal()),
                            tolman_pressure(params, jet.mean_curvature)));
                }
                ++count;
            }
        }
        report.rows.push_back(make_row("proportional_curvature_vs_extended",
            "general condition with Gamma_hat = delta Gamma_0 / 2 equals (1 - delta H)(div P0 - p0) - delta P0.grad H "
            "(sphere, torus)",
            dev, 1e-10, count));
        report.rows.push_back(make_row("extended_isotropic_vs_tolman",
            "extended condition with isotropic Gamma_0 on a sphere gives 2 sigma H (1 - delta H)", tolman_dev, 1e-10,
            count / 8));
    }

    // Adapted-frame sums vs the frame-free divergence, homogeneous anisotropic stresses.
    {
        double dev = 0.0, flipped = 0.0;
        int count = 0;
        for (const auto& surface : fixtures) {
            for (int k : {1, 3}) {
                for (int s = 0; s < n; ++s) {
                    const GeometryJet jet = random_jet(surface, rng);
                    const StressCoefficients chi = StressCoefficients::constant(random_matrix(2, k, rng));
                    const StressCoefficients kappa = StressCoefficients::constant(random_matrix(2, k, rng));
                    const Eigen::VectorXd pbar = random_matrix(k, 1, rng), phat = random_matrix(k, 1, rng);
                    const ExpansionTerms terms = expansion_terms(jet, chi, kappa);
                    const Eigen::VectorXd adapted = terms.bc_rhs(pbar, phat);

                    const double H = jet.mean_curvature;
                    const Eigen::VectorXd contraction = kappa.values.transpose() * jet.mean_curvature_derivative;
                    Eigen::VectorXd frame_free;
                    if (k == 3) {
                        const Vec3 ambient = frame_free_divergence(jet, chi) - jet.ambient_vector(pbar)
                            + 2.0 * H * (jet.ambient_vector(phat) - Vec3(frame_free_divergence(jet, kappa)))
                            - 2.0 * jet.ambient_vector(contraction);
                        frame_free = jet.adapted_components(ambient);
                        flipped = std::max(flipped, std::abs(terms.flipped_normal_row(pbar(2), phat(2)) - adapted(2)));
                    } else {
                        frame_free = frame_free_divergence(jet, chi) - pbar
                            + 2.0 * H * (phat - frame_free_divergence(jet, kappa)) - 2.0 * contraction;
                    }
                    dev = std::max(dev, relative(adapted, frame_free));
                    ++count;
                }
            }
        }
        report.rows.push_back(make_row("adapted_frame_vs_frame_free",
            "adapted-frame expansion (Christoffel and b_AB terms) equals the frame-free divergence for "
            "homogeneous anisotropic chi, kappa (sphere, torus; k = 1, 3)",
            dev, 1e-10, count));
        ReductionRow finding = make_row("flipped_normal_row_signs",
            "normal row with +kappa^{B3} Gamma^A_BA and +kappa^{AB} b_AB inside the 2H block, differs "
            "from the general condition (which gives minus signs)",
            flipped, 1e-10, count / 2);
        finding.status = ReductionRow::Status::finding;
        report.rows.push_back(finding);
    }

    // Discrete droplet on an icosphere.
    {
        const auto params = IsotropicSurfaceParams::make(1.0, 0.1);
        double dev = 0.0;
        for (double R : {1.0, 2.0, 4.0}) {
            const double expected = 2.0 * params.sigma / R - 4.0 * params.tau / (R * R);
            dev = std::max(dev,
                std::abs(discrete_droplet_pressure(params, R, options.discrete_level) - expected) / std::abs(expected));
        }
        report.rows.push_back(make_row("discrete_sphere_droplet",
            "finite-difference pressure of the assembled isotropic surface action under radial displacement "
            "vs 2 sigma H - 4 tau H^2 (R = 1, 2, 4)",
            dev, 0.05, 3));
    }
    return report;
}

} // namespace curvbc
