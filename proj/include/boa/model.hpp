#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boa/grid.hpp"

namespace boa {

/// Ordered set of band labels; bands are indexed by ascending eigenvalue,
/// counted with multiplicity.
struct BandSelector {
    std::vector<int> indices;

    static BandSelector single(int j) { return BandSelector{{j}}; }
    static BandSelector range(int first, int count);
    int count() const { return static_cast<int>(indices.size()); }
    bool contains(int j) const;
    void validate(int dim_electronic) const;  // throws ConfigError
};

/// A smooth map x -> Hermitian m x m matrix plus metadata. The electronic
/// Hilbert space is finite dimensional by construction; m = 1 is admitted
/// for scalar-potential test models.
struct ElectronicModel {
    std::string name;
    int dim_nuclear = 1;
    int dim_electronic = 2;
    std::function<Eigen::MatrixXcd(const Point&)> evaluator;
    std::vector<Point> crossing_points;
    Point domain_lo{-50.0, -50.0};
    Point domain_hi{50.0, 50.0};

    // Optional closed-form hints: bands ascending, frame columns matching.
    std::function<Eigen::VectorXd(const Point&)> analytic_bands;
    std::function<Eigen::MatrixXcd(const Point&)> analytic_frame;

    bool has_analytic() const { return static_cast<bool>(analytic_bands); }
    bool in_domain(const Point& x) const;
};

/// Evaluate H_e(x). Throws DomainError outside the declared domain and
/// ConfigError if the evaluator output fails the 1e-12 hermiticity guard.
Eigen::MatrixXcd eval_electronic(const ElectronicModel& model, const Point& x);

struct GapProfile {
    double min_gap = 0.0;
    Point argmin{0.0, 0.0};
    bool violation = false;  // min_gap below threshold; caller decides
};

/// Minimum over the region of min_{j in I, i not in I} |E_i - E_j|.
GapProfile gap_profile(const ElectronicModel& model, const std::vector<Point>& region,
                       const BandSelector& selector, double threshold = 1e-6);

// ---- model zoo ------------------------------------------------------------

/// Conical crossing W(x) = C [[x1, x2], [x2, -x1]] with bands +-C|x|.
/// The analytic frame carries the e^{-i phi/2} prefactor that makes it
/// single-valued and matches the closed forms for A, phi and the mass tensor.
ElectronicModel make_conical(double C, double half_width = 10.0);

/// Globally gapped two-level model [[f(x), delta], [delta, -f(x)]] with
/// analytic bands +-sqrt(f^2 + delta^2). Shapes: "tanh", "linear".
ElectronicModel make_avoided_crossing_1d(double delta, const std::string& shape = "tanh");

/// Avoided crossing conjugated by diag(e^{i gamma/2}, e^{-i gamma/2}),
/// gamma = twist * tanh(x). Its smooth eigenframe has a genuinely nonzero
/// Berry connection, useful for exercising the order-0 vs order-1 gap.
ElectronicModel make_twisted_avoided_crossing_1d(double delta, double twist,
                                                 const std::string& shape = "tanh");

/// x-independent H_e = diag(0, 1, ..., m-1); constant eigenframe.
ElectronicModel make_constant_frame(int m = 2, int dim_nuclear = 1);

/// Scalar potential (m = 1). Profiles: "harmonic" (x^2/2), "free" (0).
ElectronicModel make_scalar_potential(const std::string& profile, int dim_nuclear = 1);

/// Declarative model construction for config-driven runs.
struct ModelSpec {
    std::string name;
    std::map<std::string, double> params;

    double param(const std::string& key, double fallback) const;
};

ElectronicModel make_model(const ModelSpec& spec);

}  // namespace boa
