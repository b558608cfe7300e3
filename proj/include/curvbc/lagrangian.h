#pragma once

#include <curvbc/surface_mesh.h>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace curvbc {

///
/// Local state of a k-component field at one point: value phi_k, rate dphi_k/dt and the gradient
/// (k x 3, row k is grad phi_k). On the boundary the rows are surface gradients, i.e. tangent.
///
struct FieldJet
{
    Eigen::VectorXd value;
    Eigen::VectorXd rate;
    Eigen::MatrixXd gradient;

    static FieldJet zero(int components);
    int components() const { return static_cast<int>(value.size()); }
};

/// A density and its first partial derivatives at one state.
struct DensityPartials
{
    double value = 0.0;
    Eigen::VectorXd d_value;    ///< dF/dphi_k
    Eigen::VectorXd d_rate;     ///< dF/d(dphi_k/dt)
    Eigen::MatrixXd d_gradient; ///< dF/d(grad phi_k), k x 3

    static DensityPartials zero(int components);
};

/// Bulk density L(x, phi, dphi/dt, grad phi) with hand-coded partials.
class BulkDensity
{
public:
    virtual ~BulkDensity() = default;

    virtual int components() const = 0;
    virtual DensityPartials evaluate(const Vec3& x, const FieldJet& jet) const = 0;
    /// Directional derivative of the partials along `direction` (the value member is unused).
    virtual DensityPartials linearize(
        const Vec3& x, const FieldJet& jet, const FieldJet& direction) const = 0;
    /// Polynomial of degree <= 2 in (phi, grad phi): the stationarity system is linear.
    virtual bool is_quadratic() const { return false; }
    virtual bool rate_dependent() const { return false; }
};

/// Surface density Gamma(point, phi, dphi/dt, surface grad phi) with hand-coded partials.
class SurfaceDensity
{
public:
    virtual ~SurfaceDensity() = default;

    virtual int components() const = 0;
    virtual DensityPartials evaluate(const SurfacePoint& p, const FieldJet& jet) const = 0;
    virtual DensityPartials linearize(
        const SurfacePoint& p, const FieldJet& jet, const FieldJet& direction) const = 0;
    ///
    /// Pointwise surface divergence d_A [dGamma/d(d_A phi_k)] of the gradient partial, for a field
    /// whose first jet is `jet`. Catalog densities are affine in the surface gradient, so a first
    /// jet suffices.
    ///
    virtual Eigen::VectorXd flux_divergence(const SurfacePoint& p, const FieldJet& jet) const = 0;
    virtual bool is_quadratic() const { return false; }
    virtual bool rate_dependent() const { return false; }
};

/// Tangential surface flux S^A (returned as an ambient tangent vector).
class TangentialFlux
{
public:
    virtual ~TangentialFlux() = default;
    virtual Vec3 evaluate(const SurfacePoint& p, const FieldJet& jet) const = 0;
};

struct BulkLagrangian
{
    std::string name;
    std::map<std::string, double> parameters;
    std::shared_ptr<const BulkDensity> density;

    int components() const { return density->components(); }
    bool rate_dependent() const { return density->rate_dependent(); }
    bool is_quadratic() const { return density->is_quadratic(); }
};

BulkLagrangian harmonic_bulk();
/// L = 1/2 |grad phi|^2 - f phi.
BulkLagrangian poisson_source_bulk(double f);
/// L = 1/2 lambda (tr eps)^2 + mu tr(eps^2), eps = sym(grad u), k = 3.
BulkLagrangian linear_elastic_bulk(double lambda, double mu);
/// Catalog lookup by name: "harmonic", "poisson_source" {f}, "linear_elastic" {lambda, mu}.
BulkLagrangian builtin_bulk(const std::string& name, const std::map<std::string, double>& parameters);

///
/// Scalar function of the field value with derivatives up to third order:
/// zero, quadratic 1/2 phi^T B phi + b^T phi + c, or quartic a/4 |phi|^4.
///
class ScalarPotential
{
public:
    enum class Kind { zero, quadratic, quartic };

    static ScalarPotential zero(int components);
    static ScalarPotential quadratic(Eigen::MatrixXd B, Eigen::VectorXd b, double c = 0.0);
    static ScalarPotential quartic(int components, double a);

    Kind kind() const { return m_kind; }
    int components() const { return m_components; }
    bool is_zero() const;

    double value(const Eigen::VectorXd& phi) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& phi) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& phi) const;
    /// Derivative of the Hessian along `direction`.
    Eigen::MatrixXd hessian_derivative(const Eigen::VectorXd& phi, const Eigen::VectorXd& direction) const;

private:
    Kind m_kind = Kind::zero;
    int m_components = 1;
    Eigen::MatrixXd m_B;
    Eigen::VectorXd m_b;
    double m_c = 0.0;
    double m_a = 0.0;
};

///
/// Tangent coefficient field P (c + W x) built from an affine ambient field. Its surface divergence
/// is tr(P W) - 2H (c + W x) . N in closed form; rotation fields (W skew) about an axis of symmetry
/// of the surface are divergence free.
///
struct AffineTangentField
{
    Vec3 offset = Vec3::Zero();
    Eigen::Matrix3d linear = Eigen::Matrix3d::Zero();

    static AffineTangentField zero() { return {}; }
    static AffineTangentField constant(const Vec3& c) { return {c, Eigen::Matrix3d::Zero()}; }
    static AffineTangentField rotation(const Vec3& axis);

    Vec3 value(const SurfacePoint& p) const;
    double divergence(const SurfacePoint& p) const;
    bool is_zero() const { return offset.isZero(0.0) && linear.isZero(0.0); }
};

///
/// One channel (Gamma_0 or Gamma_hat) of a rate-independent restricted surface density:
///     potential(phi) + channel_field^A d_A channel_potential(phi) + stress[k]^A d_A phi_k
///
struct RestrictedChannel
{
    ScalarPotential potential = ScalarPotential::zero(1);
    ScalarPotential channel_potential = ScalarPotential::zero(1);
    AffineTangentField channel_field;
    /// One tangent field per field component; empty means zero.
    std::vector<AffineTangentField> stress;
};

/// Gamma_0 (base) and Gamma_hat (curvature) channels of a restricted surface Lagrangian.
struct RestrictedForm
{
    int components = 1;
    RestrictedChannel base;
    RestrictedChannel curvature;
};

struct IsotropicSurfaceParams
{
    double sigma = 1.0;
    double tau = 0.0;

    /// Validates sigma > 0 (delta = 2 tau / sigma must be defined).
    static IsotropicSurfaceParams make(double sigma, double tau);
    double delta() const { return 2.0 * tau / sigma; }
};

///
/// Surface Lagrangian Gamma = Gamma_0 + div_s S - 2H Gamma_hat. The restricted and isotropic
/// records, when present, describe how `base` and `curvature` were built; evaluation always goes
/// through the general density interface.
///
struct SurfaceLagrangian
{
    std::string name;
    int components = 1;
    std::shared_ptr<const SurfaceDensity> base;
    std::shared_ptr<const SurfaceDensity> curvature;
    std::shared_ptr<const TangentialFlux> tangential;
    std::optional<RestrictedForm> restricted;
    std::optional<IsotropicSurfaceParams> isotropic;

    bool rate_dependent() const { return base->rate_dependent() || curvature->rate_dependent(); }
    bool is_quadratic() const { return base->is_quadratic() && curvature->is_quadratic(); }
};

/// Restricted density built from one channel (exposed for composing custom Lagrangians).
std::shared_ptr<const SurfaceDensity> make_restricted_density(int components, RestrictedChannel channel);

/// Throws DimensionError on shape mismatches.
SurfaceLagrangian make_restricted_surface(RestrictedForm form);

///
/// Isotropic surface tensions. For k = 3, Gamma_0 = sigma tr(grad_s phi) and
/// Gamma_hat = tau tr(grad_s phi), i.e. chi^{AB} = sigma g^{AB}, kappa^{AB} = tau g^{AB} and no
/// normal stress components. For k = 1 the scalar is read as a normal displacement u (phi = u N),
/// giving Gamma_0 = 2 sigma H u and Gamma_hat = 2 tau H u.
///
SurfaceLagrangian make_isotropic_surface(double sigma, double tau, int components = 3);

/// Gamma_0 = 1/2 beta |phi|^2, Gamma_hat = 0.
SurfaceLagrangian make_robin_surface(double beta, int components = 1);
/// Gamma_0 = -g . phi (prescribed flux), Gamma_hat = 0.
SurfaceLagrangian make_neumann_surface(const Eigen::VectorXd& g);
/// Gamma = 0.
SurfaceLagrangian make_free_surface(int components = 1);

/// Copy of `surface` with a tangential flux added.
SurfaceLagrangian with_tangential_flux(SurfaceLagrangian surface, std::shared_ptr<const TangentialFlux> flux);

/// S = phi_component * field(point).
class FieldScaledTangentialFlux final : public TangentialFlux
{
public:
    FieldScaledTangentialFlux(AffineTangentField field, int component)
        : m_field(field)
        , m_component(component)
    {}
    Vec3 evaluate(const SurfacePoint& p, const FieldJet& jet) const override;

private:
    AffineTangentField m_field;
    int m_component;
};

/// factor * Gamma for an existing density.
class ScaledSurfaceDensity final : public SurfaceDensity
{
public:
    ScaledSurfaceDensity(std::shared_ptr<const SurfaceDensity> inner, double factor)
        : m_inner(std::move(inner))
        , m_factor(factor)
    {}
    int components() const override { return m_inner->components(); }
    DensityPartials evaluate(const SurfacePoint& p, const FieldJet& jet) const override;
    DensityPartials linearize(
        const SurfacePoint& p, const FieldJet& jet, const FieldJet& direction) const override;
    Eigen::VectorXd flux_divergence(const SurfacePoint& p, const FieldJet& jet) const override;
    bool is_quadratic() const override { return m_inner->is_quadratic(); }
    bool rate_dependent() const override { return m_inner->rate_dependent(); }

private:
    std::shared_ptr<const SurfaceDensity> m_inner;
    double m_factor;
};

/// Outcome of auditing hand-coded partials against central finite differences.
struct PartialsReport
{
    int trials = 0;
    double threshold = 1e-6;
    double value_deviation = 0.0;
    double rate_deviation = 0.0;
    double gradient_deviation = 0.0;
    /// Hand-coded linearization against finite differences of the partials.
    double linearization_deviation = 0.0;

    double max_deviation() const;
    bool passed() const { return max_deviation() <= threshold; }
};

/// Random states with a fixed seed; deviations are |analytic - fd| / max(1, |analytic|).
PartialsReport check_partials(const BulkDensity& density, int trials, std::uint64_t seed = 0);
/// Audits both Gamma_0 and Gamma_hat.
PartialsReport check_partials(const SurfaceLagrangian& surface, int trials, std::uint64_t seed = 0);
PartialsReport check_partials(const SurfaceDensity& density, int trials, std::uint64_t seed = 0);

} // namespace curvbc
