#include "boa/model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "boa/errors.hpp"

namespace boa {

BandSelector BandSelector::range(int first, int count) {
    BandSelector s;
    for (int j = 0; j < count; ++j) s.indices.push_back(first + j);
    return s;
}

bool BandSelector::contains(int j) const {
    return std::find(indices.begin(), indices.end(), j) != indices.end();
}

void BandSelector::validate(int dim_electronic) const {
    if (indices.empty()) throw ConfigError("band selector is empty");
    for (int j : indices)
        if (j < 0 || j >= dim_electronic)
            throw ConfigError("band index " + std::to_string(j) + " outside 0.." +
                              std::to_string(dim_electronic - 1));
    for (size_t k = 1; k < indices.size(); ++k)
        if (indices[k] != indices[k - 1] + 1)
            throw ConfigError("band selector must name adjacent bands in ascending order");
}

bool ElectronicModel::in_domain(const Point& x) const {
    for (int a = 0; a < dim_nuclear; ++a)
        if (x[a] < domain_lo[a] || x[a] > domain_hi[a]) return false;
    return true;
}

Eigen::MatrixXcd eval_electronic(const ElectronicModel& model, const Point& x) {
    if (!model.in_domain(x)) throw DomainError("point outside declared domain of " + model.name);
    Eigen::MatrixXcd h = model.evaluator(x);
    const double defect = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-12)
        throw ConfigError("evaluator of " + model.name + " is not Hermitian, defect " +
                          std::to_string(defect));
    return h;
}

GapProfile gap_profile(const ElectronicModel& model, const std::vector<Point>& region,
                       const BandSelector& selector, double threshold) {
    if (region.empty()) throw ConfigError("gap_profile region is empty");
    selector.validate(model.dim_electronic);
    GapProfile out;
    out.min_gap = std::numeric_limits<double>::infinity();
    out.argmin = region.front();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
    for (const Point& x : region) {
        solver.compute(eval_electronic(model, x), Eigen::EigenvaluesOnly);
        const Eigen::VectorXd& e = solver.eigenvalues();  // ascending, with multiplicity
        for (int j : selector.indices) {
            for (int i = 0; i < model.dim_electronic; ++i) {
                if (selector.contains(i)) continue;
                const double gap = std::abs(e(i) - e(j));
                if (gap < out.min_gap) {
                    out.min_gap = gap;
                    out.argmin = x;
                }
            }
        }
    }
    out.violation = out.min_gap < threshold;
    return out;
}

ElectronicModel make_conical(double C, double half_width) {
    if (C <= 0.0) throw ConfigError("conical model requires C > 0");
    ElectronicModel m;
    m.name = "conical";
    m.dim_nuclear = 2;
    m.dim_electronic = 2;
    m.domain_lo = {-half_width, -half_width};
    m.domain_hi = {half_width, half_width};
    m.crossing_points = {{0.0, 0.0}};
    m.evaluator = [C](const Point& x) {
        Eigen::MatrixXcd h(2, 2);
        h << C * x[0], C * x[1], C * x[1], -C * x[0];
        return h;
    };
    m.analytic_bands = [C](const Point& x) {
        const double r = std::hypot(x[0], x[1]);
        Eigen::VectorXd e(2);
        e << -C * r, C * r;
        return e;
    };
    m.analytic_frame = [](const Point& x) {
        const double phi = std::atan2(x[1], x[0]);
        const cplx pref = std::exp(cplx{0.0, -phi / 2.0});
        const double c = std::cos(phi / 2.0), s = std::sin(phi / 2.0);
        Eigen::MatrixXcd f(2, 2);
        // columns ascending: xi_- (band 0), xi_+ (band 1)
        f(0, 0) = -pref * s;
        f(1, 0) = pref * c;
        f(0, 1) = pref * c;
        f(1, 1) = pref * s;
        return f;
    };
    return m;
}

namespace {

std::function<double(double)> profile_fn(const std::string& shape) {
    if (shape == "tanh") return [](double x) { return std::tanh(x); };
    if (shape == "linear") return [](double x) { return x; };
    throw ConfigError("unknown 1d profile shape '" + shape + "'");
}

std::function<double(double)> profile_derivative(const std::string& shape) {
    if (shape == "tanh")
        return [](double x) {
            const double c = std::cosh(x);
            return 1.0 / (c * c);
        };
    if (shape == "linear") return [](double) { return 1.0; };
    throw ConfigError("unknown 1d profile shape '" + shape + "'");
}

}  // namespace

ElectronicModel make_avoided_crossing_1d(double delta, const std::string& shape) {
    if (delta <= 0.0) throw ConfigError("avoided crossing requires delta > 0");
    auto f = profile_fn(shape);
    ElectronicModel m;
    m.name = "avoided_crossing_" + shape;
    m.dim_nuclear = 1;
    m.dim_electronic = 2;
    m.evaluator = [f, delta](const Point& x) {
        const double v = f(x[0]);
        Eigen::MatrixXcd h(2, 2);
        h << v, delta, delta, -v;
        return h;
    };
    m.analytic_bands = [f, delta](const Point& x) {
        const double rho = std::hypot(f(x[0]), delta);
        Eigen::VectorXd e(2);
        e << -rho, rho;
        return e;
    };
    m.analytic_frame = [f, delta](const Point& x) {
        const double theta = std::atan2(delta, f(x[0]));  // in (0, pi) for delta > 0
        const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
        Eigen::MatrixXcd fr(2, 2);
        fr(0, 0) = -s;
        fr(1, 0) = c;
        fr(0, 1) = c;
        fr(1, 1) = s;
        return fr;
    };
    return m;
}

ElectronicModel make_twisted_avoided_crossing_1d(double delta, double twist,
                                                 const std::string& shape) {
    ElectronicModel base = make_avoided_crossing_1d(delta, shape);
    ElectronicModel m = base;
    m.name = "twisted_" + base.name;
    auto gamma = [twist](double x) { return twist * std::tanh(x); };
    m.evaluator = [base, gamma](const Point& x) {
        const Eigen::MatrixXcd h = base.evaluator(x);
        const double g = gamma(x[0]);
        Eigen::Vector2cd v(std::exp(cplx{0.0, g / 2.0}), std::exp(cplx{0.0, -g / 2.0}));
        return Eigen::MatrixXcd(v.asDiagonal() * h * v.conjugate().asDiagonal());
    };
    m.analytic_frame = [base, gamma](const Point& x) {
        const double g = gamma(x[0]);
        Eigen::Vector2cd v(std::exp(cplx{0.0, g / 2.0}), std::exp(cplx{0.0, -g / 2.0}));
        return Eigen::MatrixXcd(v.asDiagonal() * base.analytic_frame(x));
    };
    return m;
}

ElectronicModel make_constant_frame(int m, int dim_nuclear) {
    if (m < 2) throw ConfigError("constant frame model requires m >= 2");
    ElectronicModel model;
    model.name = "constant_frame";
    model.dim_nuclear = dim_nuclear;
    model.dim_electronic = m;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m, m);
    for (int j = 0; j < m; ++j) h(j, j) = static_cast<double>(j);
    model.evaluator = [h](const Point&) { return h; };
    model.analytic_bands = [m](const Point&) {
        Eigen::VectorXd e(m);
        for (int j = 0; j < m; ++j) e(j) = static_cast<double>(j);
        return e;
    };
    model.analytic_frame = [m](const Point&) { return Eigen::MatrixXcd::Identity(m, m); };
    return model;
}

ElectronicModel make_scalar_potential(const std::string& profile, int dim_nuclear) {
    ElectronicModel model;
    model.name = "scalar_" + profile;
    model.dim_nuclear = dim_nuclear;
    model.dim_electronic = 1;
    std::function<double(const Point&)> v;
    if (profile == "harmonic") {
        v = [dim_nuclear](const Point& x) {
            double r2 = 0.0;
            for (int a = 0; a < dim_nuclear; ++a) r2 += x[a] * x[a];
            return 0.5 * r2;
        };
    } else if (profile == "free") {
        v = [](const Point&) { return 0.0; };
    } else {
        throw ConfigError("unknown scalar potential profile '" + profile + "'");
    }
    model.evaluator = [v](const Point& x) {
        Eigen::MatrixXcd h(1, 1);
        h(0, 0) = v(x);
        return h;
    };
    model.analytic_bands = [v](const Point& x) {
        Eigen::VectorXd e(1);
        e(0) = v(x);
        return e;
    };
    model.analytic_frame = [](const Point&) { return Eigen::MatrixXcd::Identity(1, 1); };
    return model;
}

double ModelSpec::param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

ElectronicModel make_model(const ModelSpec& spec) {
    if (spec.name == "conical") return make_conical(spec.param("C", 1.0), spec.param("half_width", 10.0));
    if (spec.name == "avoided_crossing_tanh")
        return make_avoided_crossing_1d(spec.param("delta", 0.5), "tanh");
    if (spec.name == "avoided_crossing_linear")
        return make_avoided_crossing_1d(spec.param("delta", 0.5), "linear");
    if (spec.name == "twisted_avoided_crossing_tanh")
        return make_twisted_avoided_crossing_1d(spec.param("delta", 0.5), spec.param("twist", 0.5),
                                                "tanh");
    if (spec.name == "constant_frame")
        return make_constant_frame(static_cast<int>(spec.param("m", 2)),
                                   static_cast<int>(spec.param("dim", 1)));
    if (spec.name == "harmonic") return make_scalar_potential("harmonic", static_cast<int>(spec.param("dim", 1)));
    if (spec.name == "free") return make_scalar_potential("free", static_cast<int>(spec.param("dim", 1)));
    throw ConfigError("unknown model '" + spec.name + "'");
}

}  // namespace boa
