#include <curvbc/lagrangian.h>

#include <curvbc/errors.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace curvbc {

FieldJet FieldJet::zero(int components)
{
    return {Eigen::VectorXd::Zero(components), Eigen::VectorXd::Zero(components),
        Eigen::MatrixXd::Zero(components, 3)};
}

DensityPartials DensityPartials::zero(int components)
{
    return {0.0, Eigen::VectorXd::Zero(components), Eigen::VectorXd::Zero(components),
        Eigen::MatrixXd::Zero(components, 3)};
}

namespace {

void require_finite(double x, const char* name)
{
    if (!std::isfinite(x)) {
        throw ParameterError(std::string(name) + " must be finite");
    }
}

void check_jet(const FieldJet& jet, int k)
{
    if (jet.value.size() != k || jet.rate.size() != k || jet.gradient.rows() != k
        || jet.gradient.cols() != 3) {
        std::ostringstream msg;
        msg << "field jet does not have " << k << " components";
        throw DimensionError(msg.str());
    }
}

class HarmonicDensity final : public BulkDensity
{
public:
    explicit HarmonicDensity(double source)
        : m_source(source)
    {}

    int components() const override { return 1; }

    DensityPartials evaluate(const Vec3&, const FieldJet& jet) const override
    {
        check_jet(jet, 1);
        DensityPartials out = DensityPartials::zero(1);
        out.value = 0.5 * jet.gradient.squaredNorm() - m_source * jet.value(0);
        out.d_value(0) = -m_source;
        out.d_gradient = jet.gradient;
        return out;
    }

    DensityPartials linearize(const Vec3&, const FieldJet& jet, const FieldJet& direction) const override
    {
        check_jet(jet, 1);
        check_jet(direction, 1);
        DensityPartials out = DensityPartials::zero(1);
        out.d_gradient = direction.gradient;
        return out;
    }

    bool is_quadratic() const override { return true; }

private:
    double m_source;
};

class LinearElasticDensity final : public BulkDensity
{
public:
    LinearElasticDensity(double lambda, double mu)
        : m_lambda(lambda)
        , m_mu(mu)
    {}

    int components() const override { return 3; }

    DensityPartials evaluate(const Vec3&, const FieldJet& jet) const override
    {
        check_jet(jet, 3);
        const Eigen::Matrix3d eps = 0.5 * (jet.gradient + jet.gradient.transpose());
        const double tr = eps.trace();
        DensityPartials out = DensityPartials::zero(3);
        out.value = 0.5 * m_lambda * tr * tr + m_mu * eps.squaredNorm();
        out.d_gradient = stress(eps);
        return out;
    }

    DensityPartials linearize(const Vec3&, const FieldJet& jet, const FieldJet& direction) const override
    {
        check_jet(jet, 3);
        check_jet(direction, 3);
        DensityPartials out = DensityPartials::zero(3);
        out.d_gradient = stress(0.5 * (direction.gradient + direction.gradient.transpose()));
        return out;
    }

    bool is_quadratic() const override { return true; }

private:
    Eigen::Matrix3d stress(const Eigen::Matrix3d& eps) const
    {
        return m_lambda * eps.trace() * Eigen::Matrix3d::Identity() + 2.0 * m_mu * eps;
    }

    double m_lambda;
    double m_mu;
};

} // namespace

BulkLagrangian harmonic_bulk()
{
    return {"harmonic", {}, std::make_shared<HarmonicDensity>(0.0)};
}

BulkLagrangian poisson_source_bulk(double f)
{
    require_finite(f, "source f");
    return {"poisson_source", {{"f", f}}, std::make_shared<HarmonicDensity>(f)};
}

BulkLagrangian linear_elastic_bulk(double lambda, double mu)
{
    require_finite(lambda, "lambda");
    require_finite(mu, "mu");
    if (!(mu > 0.0)) {
        throw ParameterError("linear_elastic requires mu > 0");
    }
    if (lambda + 2.0 * mu / 3.0 < 0.0) {
        throw ParameterError("linear_elastic requires lambda + 2 mu / 3 >= 0");
    }
    return {"linear_elastic", {{"lambda", lambda}, {"mu", mu}},
        std::make_shared<LinearElasticDensity>(lambda, mu)};
}

BulkLagrangian builtin_bulk(const std::string& name, const std::map<std::string, double>& parameters)
{
    auto expect_keys = [&](std::set<std::string> allowed) {
        for (const auto& [key, value] : parameters) {
            if (!allowed.count(key)) {
                throw ParameterError("unknown parameter '" + key + "' for bulk Lagrangian " + name);
            }
        }
        for (const auto& key : allowed) {
            if (!parameters.count(key)) {
                throw ParameterError("bulk Lagrangian " + name + " requires parameter '" + key + "'");
            }
        }
    };

    if (name == "harmonic") {
        expect_keys({});
        return harmonic_bulk();
    }
    if (name == "poisson_source") {
        expect_keys({"f"});
        return poisson_source_bulk(parameters.at("f"));
    }
    if (name == "linear_elastic") {
        expect_keys({"lambda", "mu"});
        return linear_elastic_bulk(parameters.at("lambda"), parameters.at("mu"));
    }
    throw ParameterError("unknown bulk Lagrangian '" + name + "'");
}

// ------------------------------------------------------------------------------------------------

ScalarPotential ScalarPotential::zero(int components)
{
    if (components < 1) {
        throw DimensionError("potential needs at least one component");
    }
    ScalarPotential p;
    p.m_components = components;
    return p;
}

ScalarPotential ScalarPotential::quadratic(Eigen::MatrixXd B, Eigen::VectorXd b, double c)
{
    const auto k = b.size();
    if (k < 1 || B.rows() != k || B.cols() != k) {
        throw DimensionError("quadratic potential needs a k x k matrix and a k vector");
    }
    if (!B.allFinite() || !b.allFinite() || !std::isfinite(c)) {
        throw ParameterError("quadratic potential coefficients must be finite");
    }
    ScalarPotential p;
    p.m_kind = Kind::quadratic;
    p.m_components = static_cast<int>(k);
    p.m_B = 0.5 * (B + B.transpose());
    p.m_b = std::move(b);
    p.m_c = c;
    return p;
}

ScalarPotential ScalarPotential::quartic(int components, double a)
{
    require_finite(a, "quartic coefficient");
    ScalarPotential p = zero(components);
    p.m_kind = Kind::quartic;
    p.m_a = a;
    return p;
}

bool ScalarPotential::is_zero() const
{
    switch (m_kind) {
    case Kind::zero:
        return true;
    case Kind::quadratic:
        return m_B.isZero(0.0) && m_b.isZero(0.0) && m_c == 0.0;
    case Kind::quartic:
        return m_a == 0.0;
    }
    return false;
}

double ScalarPotential::value(const Eigen::VectorXd& phi) const
{
    switch (m_kind) {
    case Kind::zero:
        return 0.0;
    case Kind::quadratic:
        return 0.5 * phi.dot(m_B * phi) + m_b.dot(phi) + m_c;
    case Kind::quartic: {
        const double s = phi.squaredNorm();
        return 0.25 * m_a * s * s;
    }
    }
    return 0.0;
}

Eigen::VectorXd ScalarPotential::gradient(const Eigen::VectorXd& phi) const
{
    switch (m_kind) {
    case Kind::zero:
        return Eigen::VectorXd::Zero(m_components);
    case Kind::quadratic:
        return m_B * phi + m_b;
    case Kind::quartic:
        return m_a * phi.squaredNorm() * phi;
    }
    return {};
}

Eigen::MatrixXd ScalarPotential::hessian(const Eigen::VectorXd& phi) const
{
    switch (m_kind) {
    case Kind::zero:
        return Eigen::MatrixXd::Zero(m_components, m_components);
    case Kind::quadratic:
        return m_B;
    case Kind::quartic:
        return m_a
            * (phi.squaredNorm() * Eigen::MatrixXd::Identity(m_components, m_components)
                + 2.0 * phi * phi.transpose());
    }
    return {};
}

Eigen::MatrixXd ScalarPotential::hessian_derivative(
    const Eigen::VectorXd& phi, const Eigen::VectorXd& direction) const
{
    if (m_kind != Kind::quartic) {
        return Eigen::MatrixXd::Zero(m_components, m_components);
    }
    return m_a
        * (2.0 * phi.dot(direction) * Eigen::MatrixXd::Identity(m_components, m_components)
            + 2.0 * (direction * phi.transpose() + phi * direction.transpose()));
}

// ------------------------------------------------------------------------------------------------

AffineTangentField AffineTangentField::rotation(const Vec3& axis)
{
    AffineTangentField f;
    f.linear << 0.0, -axis.z(), axis.y(), axis.z(), 0.0, -axis.x(), -axis.y(), axis.x(), 0.0;
    return f;
}

Vec3 AffineTangentField::value(const SurfacePoint& p) const
{
    return p.tangent_projector() * (offset + linear * p.position);
}

double AffineTangentField::divergence(const SurfacePoint& p) const
{
    const Vec3 a = offset + linear * p.position;
    return (p.tangent_projector() * linear).trace() - 2.0 * p.mean_curvature * a.dot(p.normal);
}

IsotropicSurfaceParams IsotropicSurfaceParams::make(double sigma, double tau)
{
    require_finite(sigma, "sigma");
    require_finite(tau, "tau");
    if (!(sigma > 0.0)) {
        throw ParameterError("surface tension sigma must be positive (delta = 2 tau / sigma)");
    }
    return {sigma, tau};
}

// ------------------------------------------------------------------------------------------------

namespace {

class RestrictedDensity final : public SurfaceDensity
{
public:
    RestrictedDensity(int components, RestrictedChannel channel)
        : m_k(components)
        , m_channel(std::move(channel))
    {}

    int components() const override { return m_k; }

    DensityPartials evaluate(const SurfacePoint& p, const FieldJet& jet) const override
    {
        check_jet(jet, m_k);
        const Vec3 chi_tilde = m_channel.channel_field.value(p);
        const Eigen::VectorXd g0 = m_channel.channel_potential.gradient(jet.value);
        const Eigen::VectorXd d_chi = jet.gradient * chi_tilde;

        DensityPartials out = DensityPartials::zero(m_k);
        out.value = m_channel.potential.value(jet.value) + g0.dot(d_chi);
        out.d_value = m_channel.potential.gradient(jet.value)
            + m_channel.channel_potential.hessian(jet.value) * d_chi;
        out.d_gradient = g0 * chi_tilde.transpose();
        for (int k = 0; k < static_cast<int>(m_channel.stress.size()); ++k) {
            const Vec3 chi = m_channel.stress[k].value(p);
            out.value += chi.dot(jet.gradient.row(k));
            out.d_gradient.row(k) += chi.transpose();
        }
        return out;
    }

    DensityPartials linearize(
        const SurfacePoint& p, const FieldJet& jet, const FieldJet& direction) const override
    {
        check_jet(jet, m_k);
        check_jet(direction, m_k);
        const Vec3 chi_tilde = m_channel.channel_field.value(p);
        const Eigen::MatrixXd G0 = m_channel.channel_potential.hessian(jet.value);

        DensityPartials out = DensityPartials::zero(m_k);
        out.d_value = m_channel.potential.hessian(jet.value) * direction.value
            + m_channel.channel_potential.hessian_derivative(jet.value, direction.value)
                * (jet.gradient * chi_tilde)
            + G0 * (direction.gradient * chi_tilde);
        out.d_gradient = (G0 * direction.value) * chi_tilde.transpose();
        return out;
    }

    Eigen::VectorXd flux_divergence(const SurfacePoint& p, const FieldJet& jet) const override
    {
        check_jet(jet, m_k);
        const Vec3 chi_tilde = m_channel.channel_field.value(p);
        Eigen::VectorXd out = m_channel.channel_potential.gradient(jet.value)
                * m_channel.channel_field.divergence(p)
            + m_channel.channel_potential.hessian(jet.value) * (jet.gradient * chi_tilde);
        for (int k = 0; k < static_cast<int>(m_channel.stress.size()); ++k) {
            out(k) += m_channel.stress[k].divergence(p);
        }
        return out;
    }

    bool is_quadratic() const override
    {
        return m_channel.potential.kind() != ScalarPotential::Kind::quartic
            && m_channel.channel_potential.kind() != ScalarPotential::Kind::quartic;
    }

private:
    int m_k;
    RestrictedChannel m_channel;
};

/// Gamma = 2 s H u for a scalar normal displacement u.
class NormalDisplacementDensity final : public SurfaceDensity
{
public:
    explicit NormalDisplacementDensity(double tension)
        : m_tension(tension)
    {}

    int components() const override { return 1; }

    DensityPartials evaluate(const SurfacePoint& p, const FieldJet& jet) const override
    {
        check_jet(jet, 1);
        DensityPartials out = DensityPartials::zero(1);
        out.d_value(0) = 2.0 * m_tension * p.mean_curvature;
        out.value = out.d_value(0) * jet.value(0);
        return out;
    }

    DensityPartials linearize(const SurfacePoint&, const FieldJet& jet, const FieldJet& direction) const override
    {
        check_jet(jet, 1);
        check_jet(direction, 1);
        return DensityPartials::zero(1);
    }

    Eigen::VectorXd flux_divergence(const SurfacePoint&, const FieldJet& jet) const override
    {
        check_jet(jet, 1);
        return Eigen::VectorXd::Zero(1);
    }

    bool is_quadratic() const override { return true; }

private:
    double m_tension;
};

void validate_channel(const RestrictedChannel& channel, int k, const char* name)
{
    auto fail = [&](const std::string& what) {
        std::ostringstream msg;
        msg << name << " channel: " << what << " (field has " << k << " components)";
        throw DimensionError(msg.str());
    };
    if (channel.potential.components() != k) {
        fail("potential has " + std::to_string(channel.potential.components()) + " components");
    }
    if (channel.channel_potential.components() != k) {
        fail("channel potential has " + std::to_string(channel.channel_potential.components())
            + " components");
    }
    if (!channel.stress.empty() && static_cast<int>(channel.stress.size()) != k) {
        fail("stress has " + std::to_string(channel.stress.size()) + " rows");
    }
}

} // namespace

std::shared_ptr<const SurfaceDensity> make_restricted_density(int components, RestrictedChannel channel)
{
    if (components != 1 && components != 3) {
        throw DimensionError("field must have 1 or 3 components");
    }
    validate_channel(channel, components, "restricted");
    return std::make_shared<RestrictedDensity>(components, std::move(channel));
}

SurfaceLagrangian make_restricted_surface(RestrictedForm form)
{
    if (form.components != 1 && form.components != 3) {
        throw DimensionError("field must have 1 or 3 components");
    }
    validate_channel(form.base, form.components, "base");
    validate_channel(form.curvature, form.components, "curvature");

    SurfaceLagrangian out;
    out.name = "restricted";
    out.components = form.components;
    out.base = std::make_shared<RestrictedDensity>(form.components, form.base);
    out.curvature = std::make_shared<RestrictedDensity>(form.components, form.curvature);
    out.restricted = std::move(form);
    return out;
}

SurfaceLagrangian make_isotropic_surface(double sigma, double tau, int components)
{
    const auto params = IsotropicSurfaceParams::make(sigma, tau);

    SurfaceLagrangian out;
    if (components == 3) {
        RestrictedForm form;
        form.components = 3;
        form.base.potential = form.base.channel_potential = ScalarPotential::zero(3);
        form.curvature.potential = form.curvature.channel_potential = ScalarPotential::zero(3);
        for (int k = 0; k < 3; ++k) {
            form.base.stress.push_back(AffineTangentField::constant(sigma * Vec3::Unit(k)));
            form.curvature.stress.push_back(AffineTangentField::constant(tau * Vec3::Unit(k)));
        }
        out = make_restricted_surface(std::move(form));
    } else if (components == 1) {
        out.components = 1;
        out.base = std::make_shared<NormalDisplacementDensity>(sigma);
        out.curvature = std::make_shared<NormalDisplacementDensity>(tau);
    } else {
        throw DimensionError("isotropic surface needs 1 or 3 components");
    }
    out.name = "isotropic";
    out.isotropic = params;
    return out;
}

SurfaceLagrangian make_robin_surface(double beta, int components)
{
    require_finite(beta, "beta");
    RestrictedForm form;
    form.components = components;
    form.base.potential = ScalarPotential::quadratic(
        beta * Eigen::MatrixXd::Identity(components, components), Eigen::VectorXd::Zero(components));
    form.base.channel_potential = ScalarPotential::zero(components);
    form.curvature.potential = form.curvature.channel_potential = ScalarPotential::zero(components);
    auto out = make_restricted_surface(std::move(form));
    out.name = "robin";
    return out;
}

SurfaceLagrangian make_neumann_surface(const Eigen::VectorXd& g)
{
    const int k = static_cast<int>(g.size());
    RestrictedForm form;
    form.components = k;
    form.base.potential = ScalarPotential::quadratic(Eigen::MatrixXd::Zero(k, k), -g);
    form.base.channel_potential = ScalarPotential::zero(k);
    form.curvature.potential = form.curvature.channel_potential = ScalarPotential::zero(k);
    auto out = make_restricted_surface(std::move(form));
    out.name = "neumann";
    return out;
}

SurfaceLagrangian make_free_surface(int components)
{
    RestrictedForm form;
    form.components = components;
    form.base.potential = form.base.channel_potential = ScalarPotential::zero(components);
    form.curvature.potential = form.curvature.channel_potential = ScalarPotential::zero(components);
    auto out = make_restricted_surface(std::move(form));
    out.name = "free";
    return out;
}

SurfaceLagrangian with_tangential_flux(SurfaceLagrangian surface, std::shared_ptr<const TangentialFlux> flux)
{
    surface.tangential = std::move(flux);
    return surface;
}

Vec3 FieldScaledTangentialFlux::evaluate(const SurfacePoint& p, const FieldJet& jet) const
{
    if (m_component < 0 || m_component >= jet.components()) {
        throw DimensionError("tangential flux component out of range");
    }
    return jet.value(m_component) * m_field.value(p);
}

DensityPartials ScaledSurfaceDensity::evaluate(const SurfacePoint& p, const FieldJet& jet) const
{
    DensityPartials out = m_inner->evaluate(p, jet);
    out.value *= m_factor;
    out.d_value *= m_factor;
    out.d_rate *= m_factor;
    out.d_gradient *= m_factor;
    return out;
}

DensityPartials ScaledSurfaceDensity::linearize(
    const SurfacePoint& p, const FieldJet& jet, const FieldJet& direction) const
{
    DensityPartials out = m_inner->linearize(p, jet, direction);
    out.d_value *= m_factor;
    out.d_rate *= m_factor;
    out.d_gradient *= m_factor;
    return out;
}

Eigen::VectorXd ScaledSurfaceDensity::flux_divergence(const SurfacePoint& p, const FieldJet& jet) const
{
    return m_factor * m_inner->flux_divergence(p, jet);
}

// ------------------------------------------------------------------------------------------------

double PartialsReport::max_deviation() const
{
    return std::max({value_deviation, rate_deviation, gradient_deviation, linearization_deviation});
}

namespace {

double relative_deviation(double analytic, double fd)
{
    return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
}

FieldJet random_jet(std::mt19937_64& rng, int k, const Eigen::Matrix3d& projector)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FieldJet jet = FieldJet::zero(k);
    for (int i = 0; i < k; ++i) {
        jet.value(i) = u(rng);
        jet.rate(i) = u(rng);
        for (int j = 0; j < 3; ++j) {
            jet.gradient(i, j) = u(rng);
        }
    }
    jet.gradient = jet.gradient * projector;
    return jet;
}

/// Central-difference audit shared by bulk and surface densities. `eval` maps a jet to partials.
template <class Eval, class Linearize>
void audit(PartialsReport& report, const FieldJet& jet, double scale, Eval eval, Linearize linearize,
    std::mt19937_64& rng, const Eigen::Matrix3d& projector)
{
    const int k = jet.components();
    const double h = 1e-5 * scale;
    const DensityPartials a = eval(jet);

    auto fd = [&](auto perturb) {
        FieldJet plus = jet, minus = jet;
        perturb(plus, h);
        perturb(minus, -h);
        return (eval(plus).value - eval(minus).value) / (2.0 * h);
    };

    for (int i = 0; i < k; ++i) {
        report.value_deviation = std::max(report.value_deviation,
            relative_deviation(a.d_value(i), fd([&](FieldJet& s, double d) { s.value(i) += d; })));
        report.rate_deviation = std::max(report.rate_deviation,
            relative_deviation(a.d_rate(i), fd([&](FieldJet& s, double d) { s.rate(i) += d; })));
        for (int j = 0; j < 3; ++j) {
            report.gradient_deviation = std::max(report.gradient_deviation,
                relative_deviation(
                    a.d_gradient(i, j), fd([&](FieldJet& s, double d) { s.gradient(i, j) += d; })));
        }
    }

    // Linearization along a random direction against differences of the partials.
    FieldJet dir = random_jet(rng, k, projector);
    dir.rate.setZero();
    const DensityPartials lin = linearize(jet, dir);
    FieldJet plus = jet, minus = jet;
    plus.value += h * dir.value;
    plus.gradient += h * dir.gradient;
    minus.value -= h * dir.value;
    minus.gradient -= h * dir.gradient;
    const DensityPartials ap = eval(plus), am = eval(minus);
    for (int i = 0; i < k; ++i) {
        report.linearization_deviation = std::max(report.linearization_deviation,
            relative_deviation(lin.d_value(i), (ap.d_value(i) - am.d_value(i)) / (2.0 * h)));
        for (int j = 0; j < 3; ++j) {
            report.linearization_deviation = std::max(report.linearization_deviation,
                relative_deviation(
                    lin.d_gradient(i, j), (ap.d_gradient(i, j) - am.d_gradient(i, j)) / (2.0 * h)));
        }
    }
}

void require_trials(int trials)
{
    if (trials < 1) {
        throw ParameterError("check_partials needs at least one trial");
    }
}

} // namespace

PartialsReport check_partials(const BulkDensity& density, int trials, std::uint64_t seed)
{
    require_trials(trials);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PartialsReport report;
    report.trials = trials;
    const Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();
    for (int t = 0; t < trials; ++t) {
        const Vec3 x(u(rng), u(rng), u(rng));
        const FieldJet jet = random_jet(rng, density.components(), identity);
        const double scale = std::max(1.0, std::max(jet.value.cwiseAbs().maxCoeff(),
                                               jet.gradient.cwiseAbs().maxCoeff()));
        audit(report, jet, scale, [&](const FieldJet& s) { return density.evaluate(x, s); },
            [&](const FieldJet& s, const FieldJet& d) { return density.linearize(x, s, d); }, rng,
            identity);
    }
    return report;
}

PartialsReport check_partials(const SurfaceDensity& density, int trials, std::uint64_t seed)
{
    require_trials(trials);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PartialsReport report;
    report.trials = trials;
    for (int t = 0; t < trials; ++t) {
        SurfacePoint p;
        p.position = Vec3(u(rng), u(rng), u(rng));
        Vec3 n(u(rng), u(rng), u(rng));
        if (n.norm() < 1e-3) {
            n = Vec3::UnitZ();
        }
        p.normal = n.normalized();
        p.mean_curvature = u(rng);
        const Eigen::Matrix3d projector = p.tangent_projector();
        const FieldJet jet = random_jet(rng, density.components(), projector);
        const double scale = std::max(1.0, std::max(jet.value.cwiseAbs().maxCoeff(),
                                               jet.gradient.cwiseAbs().maxCoeff()));
        audit(report, jet, scale, [&](const FieldJet& s) { return density.evaluate(p, s); },
            [&](const FieldJet& s, const FieldJet& d) { return density.linearize(p, s, d); }, rng,
            projector);
    }
    return report;
}

PartialsReport check_partials(const SurfaceLagrangian& surface, int trials, std::uint64_t seed)
{
    PartialsReport a = check_partials(*surface.base, trials, seed);
    const PartialsReport b = check_partials(*surface.curvature, trials, seed + 1);
    a.value_deviation = std::max(a.value_deviation, b.value_deviation);
    a.rate_deviation = std::max(a.rate_deviation, b.rate_deviation);
    a.gradient_deviation = std::max(a.gradient_deviation, b.gradient_deviation);
    a.linearization_deviation = std::max(a.linearization_deviation, b.linearization_deviation);
    return a;
}

} // namespace curvbc
