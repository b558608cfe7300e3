#pragma once

#include <curvbc/surface_mesh.h>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace curvbc {

enum class SurfaceKind { sphere, cylinder, torus };

std::string to_string(SurfaceKind kind);

///
/// Closed-form parameterized surface used as a geometry oracle.
///
/// Parameter conventions (u, v):
///   - sphere(R):        u = polar angle in (0, pi), v = azimuth in [0, 2 pi]
///   - cylinder(R, L):   u = azimuth in [0, 2 pi], v = height in [0, L]
///   - torus(R, r):      u = angle around the axis, v = angle around the tube, both in [0, 2 pi]
///
class AnalyticSurface
{
public:
    static AnalyticSurface sphere(double radius);
    static AnalyticSurface cylinder(double radius, double length);
    static AnalyticSurface torus(double major_radius, double minor_radius);

    SurfaceKind kind() const { return m_kind; }
    double radius() const { return m_a; }
    /// Cylinder length or torus minor radius.
    double second_parameter() const { return m_b; }

    bool contains(double u, double v) const;

private:
    AnalyticSurface(SurfaceKind kind, double a, double b)
        : m_kind(kind)
        , m_a(a)
        , m_b(b)
    {}

    SurfaceKind m_kind;
    double m_a;
    double m_b;
};

///
/// Differential geometry of an analytic surface at one parameter point.
///
/// Sign conventions: `normal` is the outward unit normal N, the second fundamental form is
/// b_AB = -N . x_,AB, so that H = 1/2 g^AB b_AB = +1/R on a sphere. The adapted frame of the
/// boundary-condition expansions is (g_1, g_2, g_3) with g_3 = -N (inward); in that frame the Gauss
/// and Weingarten formulas read x_,AB = Gamma^C_AB g_C + b_AB g_3 and g_3,A = -b_A^C g_C.
///
struct GeometryJet
{
    double u = 0.0;
    double v = 0.0;
    Vec3 position = Vec3::Zero();
    std::array<Vec3, 2> tangents{};         ///< g_1, g_2
    Vec3 normal = Vec3::UnitZ();            ///< outward N
    Eigen::Matrix2d metric;                 ///< g_AB
    Eigen::Matrix2d inverse_metric;         ///< g^AB
    Eigen::Matrix2d second_form;            ///< b_AB
    Eigen::Matrix2d mixed_curvature;        ///< b_A^C stored as (A, C)
    std::array<Eigen::Matrix2d, 2> christoffel{}; ///< christoffel[C](A, B) = Gamma^C_AB
    double mean_curvature = 0.0;            ///< closed form
    Eigen::Vector2d mean_curvature_derivative = Eigen::Vector2d::Zero(); ///< d_A H, closed form

    /// x_,11, x_,12, x_,22 from the closed-form parameterization.
    std::array<Vec3, 3> second_derivatives{};
    /// d_A N from the closed-form parameterization.
    std::array<Vec3, 2> normal_derivatives{};

    Vec3 inward_normal() const { return -normal; }
    const Vec3& second_derivative(int a, int b) const { return second_derivatives[a + b]; }
    /// g^AB d_B H g_A.
    Vec3 mean_curvature_gradient() const;
    SurfacePoint surface_point() const { return {position, normal, mean_curvature}; }
    /// Components (r^1, r^2, r^3) of an ambient vector w = r^C g_C + r^3 g_3.
    Vec3 adapted_components(const Vec3& w) const;
    /// Inverse of adapted_components.
    Vec3 ambient_vector(const Vec3& components) const;
};

GeometryJet evaluate_jet(const AnalyticSurface& surface, double u, double v);

struct SampledSurface
{
    TriangleMesh mesh;
    /// Parameter values of each vertex (meaningless where `jets` is empty).
    std::vector<Eigen::Vector2d> parameters;
    /// Exact jets; empty at vertices outside the chart (sphere poles, cylinder cap centres).
    std::vector<std::optional<GeometryJet>> jets;
};

///
/// Closed triangulation of an analytic surface on a (res_u, res_v) parameter grid. Sphere poles are
/// closed by triangle fans, periodic seams are stitched, and the cylinder is capped by a fan on
/// each end.
///
SampledSurface sample_mesh(const AnalyticSurface& surface, int res_u, int res_v);

///
/// Surface-stress coefficients chi^{Ak} given by their components in the adapted frame.
///
/// `values(A, k)` is chi^{Ak}; `derivatives[B](A, k)` is the partial derivative d_B chi^{Ak} of the
/// components. k runs over 1 column (scalar field) or 3 columns (C = 1, 2 and the g_3 component).
///
struct StressCoefficients
{
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(2, 3);
    std::array<Eigen::MatrixXd, 2> derivatives{
        Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Zero(2, 3)};

    int components() const { return static_cast<int>(values.cols()); }
    static StressCoefficients constant(const Eigen::MatrixXd& values);
};

/// Every named term of the adapted-frame expansion of the stress divergences.
struct StressDivergenceTerms
{
    Eigen::Vector2d partial_divergence = Eigen::Vector2d::Zero(); ///< chi^{AC}_{,A}
    Eigen::Vector2d trace_connection = Eigen::Vector2d::Zero();   ///< chi^{BC} Gamma^A_BA
    Eigen::Vector2d connection = Eigen::Vector2d::Zero();         ///< chi^{AB} Gamma^C_AB
    Eigen::Vector2d normal_coupling = Eigen::Vector2d::Zero();    ///< chi^{A3} b_A^C
    double normal_partial_divergence = 0.0;                      ///< chi^{A3}_{,A}
    double normal_trace_connection = 0.0;                        ///< chi^{B3} Gamma^A_BA
    double curvature_contraction = 0.0;                          ///< chi^{AB} b_AB
    Eigen::Vector2d curvature_gradient = Eigen::Vector2d::Zero(); ///< chi^{AC} d_A H
    double normal_curvature_gradient = 0.0;                      ///< chi^{A3} d_A H
    /// Scalar fields (k = 1): chi^A_{,A} and chi^B Gamma^A_BA, chi^A d_A H.
    double scalar_partial_divergence = 0.0;
    double scalar_trace_connection = 0.0;
    double scalar_curvature_gradient = 0.0;
    int components = 3;

    /// Adapted components of the covariant divergence, assembled with the Gauss-Weingarten signs.
    Eigen::VectorXd divergence() const;
    /// chi^{Ak} d_A H in adapted components.
    Eigen::VectorXd contraction_with_curvature_gradient() const;
};

struct ExpansionTerms
{
    StressDivergenceTerms chi;
    StressDivergenceTerms kappa;
    double mean_curvature = 0.0;

    ///
    /// Adapted-frame right-hand side
    ///     div chi - d gamma_bar/d phi + 2H (d gamma_hat/d phi - div kappa) - 2 kappa^{Ak} d_A H
    /// given the potential gradients in adapted components.
    ///
    Eigen::VectorXd bc_rhs(const Eigen::VectorXd& gamma_bar_gradient,
        const Eigen::VectorXd& gamma_hat_gradient) const;

    ///
    /// g_3 row with the connection and curvature kappa terms entering with plus signs:
    /// 2H (d gamma_hat/d phi_3 - kappa^{A3}_{,A} + kappa^{B3} Gamma^A_BA + kappa^{AB} b_AB).
    /// It disagrees with the frame-free result, which carries minus signs on both.
    ///
    double flipped_normal_row(double gamma_bar_derivative, double gamma_hat_derivative) const;
};

/// Throws DimensionError if chi/kappa shapes disagree or k is not 1 or 3.
ExpansionTerms expansion_terms(
    const GeometryJet& jet,
    const StressCoefficients& chi,
    const StressCoefficients& kappa);

///
/// Frame-free surface divergence of the tensor field chi^{Ak} g_A (x) g_k, computed from the
/// closed-form second derivatives x_,AB and d_A N only (no Christoffel symbols or b_AB):
///     (1/sqrt g) d_A (sqrt g v^A),  v^A = chi^{Ak} g_k.
/// Returns the ambient vector (k = 3) or a one-entry vector (k = 1).
///
Eigen::VectorXd frame_free_divergence(const GeometryJet& jet, const StressCoefficients& chi);

} // namespace curvbc
