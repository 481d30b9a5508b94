#pragma once

#include <json.hpp>

#include "boa/fit.hpp"
#include "boa/propagate.hpp"

namespace boa {

struct GridSpec {
    int dim = 1;
    std::array<int, 2> nodes{1024, 1};
    std::array<double, 2> lo{-8.0, 0.0};
    std::array<double, 2> hi{8.0, 1.0};
    bool offset = false;

    Grid to_grid() const;
    GridSpec doubled() const;
};

/// One experiment: which study, on which model/grid, over which epsilon
/// sweep, with which ensemble. Parsed from a single JSON document with
/// sections model/grid/bands/epsilons/time/ensemble/output.
struct ExperimentConfig {
    std::string study = "error_curve";
    ModelSpec model;
    GridSpec grid;
    BandSelector bands = BandSelector::single(0);
    int order = 1;
    std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
    double time_horizon = 1.0;
    EnsembleSpec ensemble;
    std::string output_dir = "out";
    GaugeKind gauge = GaugeKind::ParallelTransport;
    DerivScheme scheme = DerivScheme::CenteredFd4;
    bool refinement_check = false;
    double local_tol = 1e-9;
    double r_min_cells = 2.0;
};

/// Throws ConfigError unless: >= 4 epsilons, strictly decreasing with
/// successive ratios in [0.3, 0.8]; ensemble count >= 8; grid valid.
void validate_config(const ExperimentConfig& config);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ScalingReport {
    std::string study;
    nlohmann::json config_echo;
    std::vector<double> epsilons;
    std::vector<std::vector<double>> per_state;  // [epsilon][state]
    std::vector<double> sup_errors;
    FitResult fit;
    bool inconclusive = false;  // fit R^2 < 0.98 or refinement unstable
    bool refinement_checked = false;
    double refined_slope = 0.0;
    double slope_delta = 0.0;
    bool refinement_stable = true;
    double wall_seconds = 0.0;
};

/// Error scaling of the order-n effective propagation against the full
/// dynamics: per epsilon and ensemble state,
///   error = || Psi_full(T) - U* psi_eff(T) ||,
/// with Psi_0 = U* psi_0, U = U_(1) for order 2 and U_0 otherwise. The
/// supremum over the ensemble is fitted against epsilon on log-log axes.
ScalingReport error_curve(const ExperimentConfig& config, int order);

/// sup_x | <Psi_full(T,x), Psi_full(T,x)> - |psi_eff(T,x)|^2 | per epsilon.
ScalingReport density_gap(const ExperimentConfig& config);

/// Superadiabatic defect sweeps; returns named reports for the idempotency,
/// commutator and round-trip unitarity defects.
std::vector<std::pair<std::string, ScalingReport>> defect_study(const ExperimentConfig& config);

/// Dispatch on config.study; "defects" yields three reports, others one.
std::vector<std::pair<std::string, ScalingReport>> run_study(const ExperimentConfig& config);

struct ConicalStudyConfig {
    double C = 1.0;
    double eps = 0.05;
    GridSpec grid{2, {128, 128}, {-3.0, -3.0}, {3.0, 3.0}, true};
    double packet_radius = 1.5;
    double packet_sigma = 0.22;
    double time_horizon = 0.5;
    double r_min_cells = 2.0;
    double local_tol = 1e-9;
    int checkpoints = 8;
};

/// Radial-expectation trajectories of identical packets under the one-band
/// conical Hamiltonians {order 1, order 1 + phi, full order 2} on both
/// bands (angular realization of the mass term), plus the zero-angular-
/// momentum probe of the mass term.
struct ConicalStudyResult {
    std::vector<double> times;
    std::vector<double> radius_upper_order1, radius_upper_phi, radius_upper_full;
    std::vector<double> radius_lower_order1, radius_lower_phi, radius_lower_full;
    bool upper_inequality = false;  // adding M pushes the upper band outward
    bool lower_inequality = false;  // and pulls the lower band inward
    double m_action_ratio = 0.0;    // ||M psi_radial|| / ||(eps^2/2) phi psi_radial||
};

ConicalStudyResult conical_correction_study(const ConicalStudyConfig& config);

void write_report_json(const std::string& path, const ScalingReport& report);
void write_report_csv(const std::string& path, const ScalingReport& report);

/// Load, validate and execute a config file; writes reports under the
/// config's output directory. Returns 0 on success, 2 if any report is
/// Inconclusive. Errors escape as exceptions.
int run_experiment(const std::string& config_path);

}  // namespace boa
