#include "boa/scaling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "boa/errors.hpp"

namespace boa {

using nlohmann::json;

Grid GridSpec::to_grid() const {
    Grid g;
    g.dim = dim;
    g.nodes = nodes;
    if (dim == 1) g.nodes[1] = 1;
    g.lo = lo;
    g.hi = hi;
    g.half_cell_offset = offset;
    validate(g);
    return g;
}

GridSpec GridSpec::doubled() const {
    GridSpec s = *this;
    s.nodes[0] *= 2;
    if (dim == 2) s.nodes[1] *= 2;
    return s;
}

void validate_config(const ExperimentConfig& config) {
    if (config.epsilons.size() < 4) throw ConfigError("need at least 4 epsilon values");
    for (size_t i = 1; i < config.epsilons.size(); ++i) {
        const double ratio = config.epsilons[i] / config.epsilons[i - 1];
        if (!(config.epsilons[i] < config.epsilons[i - 1]))
            throw ConfigError("epsilon list must be strictly decreasing");
        if (ratio < 0.3 || ratio > 0.8)
            throw ConfigError("epsilon ratios must lie in [0.3, 0.8], got " + std::to_string(ratio));
    }
    if (config.ensemble.count < 8) throw ConfigError("ensemble count must be >= 8");
    if (config.time_horizon <= 0.0) throw ConfigError("time horizon must be positive");
    config.grid.to_grid();  // validates node counts and extents
    if (config.order < 0 || config.order > 2) throw ConfigError("order must be 0, 1 or 2");
}

namespace {

GaugeKind gauge_from_string(const std::string& s) {
    if (s == "parallel_transport") return GaugeKind::ParallelTransport;
    if (s == "analytic") return GaugeKind::Analytic;
    if (s == "raw") return GaugeKind::Raw;
    throw ConfigError("unknown gauge '" + s + "'");
}

std::string gauge_to_string(GaugeKind g) {
    switch (g) {
        case GaugeKind::ParallelTransport: return "parallel_transport";
        case GaugeKind::Analytic: return "analytic";
        case GaugeKind::Raw: return "raw";
    }
    return "parallel_transport";
}

DerivScheme scheme_from_string(const std::string& s) {
    if (s == "fd2") return DerivScheme::CenteredFd2;
    if (s == "fd4") return DerivScheme::CenteredFd4;
    if (s == "spectral") return DerivScheme::Spectral;
    throw ConfigError("unknown derivative scheme '" + s + "'");
}

std::string scheme_to_string(DerivScheme s) {
    switch (s) {
        case DerivScheme::CenteredFd2: return "fd2";
        case DerivScheme::CenteredFd4: return "fd4";
        case DerivScheme::Spectral: return "spectral";
    }
    return "fd4";
}

template <typename T>
T field_or(const json& j, const std::string& key, const T& fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.study = field_or<std::string>(j, "study", c.study);
    if (j.contains("model")) {
        const json& m = j.at("model");
        c.model.name = field_or<std::string>(m, "name", "");
        if (c.model.name.empty()) throw ConfigError("model.name is required");
        if (m.contains("params"))
            for (auto it = m.at("params").begin(); it != m.at("params").end(); ++it)
                c.model.params[it.key()] = it.value().get<double>();
    } else {
        throw ConfigError("config needs a 'model' section");
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        c.grid.dim = field_or<int>(g, "dim", 1);
        const auto nodes = field_or<std::vector<int>>(g, "nodes", {1024});
        const auto lo = field_or<std::vector<double>>(g, "lo", {-8.0});
        const auto hi = field_or<std::vector<double>>(g, "hi", {8.0});
        if (nodes.empty() || lo.size() != nodes.size() || hi.size() != nodes.size())
            throw ConfigError("grid nodes/lo/hi must have matching per-axis entries");
        for (size_t a = 0; a < nodes.size() && a < 2; ++a) {
            c.grid.nodes[a] = nodes[a];
            c.grid.lo[a] = lo[a];
            c.grid.hi[a] = hi[a];
        }
        if (c.grid.dim == 1) c.grid.nodes[1] = 1;
        c.grid.offset = field_or<bool>(g, "offset", false);
    } else {
        throw ConfigError("config needs a 'grid' section");
    }
    c.bands.indices = field_or<std::vector<int>>(j, "bands", {0});
    c.order = field_or<int>(j, "order", 1);
    c.epsilons = field_or<std::vector<double>>(j, "epsilons", c.epsilons);
    c.time_horizon = field_or<double>(j, "time", 1.0);
    if (j.contains("ensemble")) {
        const json& e = j.at("ensemble");
        c.ensemble.count = field_or<int>(e, "count", 16);
        c.ensemble.kinetic_bound = field_or<double>(e, "kinetic_bound", 3.0);
        c.ensemble.seed = field_or<std::uint64_t>(e, "seed", 2024);
    }
    c.output_dir = field_or<std::string>(j, "output", "out");
    c.gauge = gauge_from_string(field_or<std::string>(j, "gauge", "parallel_transport"));
    c.scheme = scheme_from_string(field_or<std::string>(j, "scheme", "fd4"));
    c.refinement_check = field_or<bool>(j, "refinement_check", false);
    c.local_tol = field_or<double>(j, "local_tol", 1e-9);
    c.r_min_cells = field_or<double>(j, "r_min_cells", 2.0);
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["study"] = c.study;
    j["model"] = {{"name", c.model.name}, {"params", c.model.params}};
    std::vector<int> nodes(c.grid.nodes.begin(), c.grid.nodes.begin() + c.grid.dim);
    std::vector<double> lo(c.grid.lo.begin(), c.grid.lo.begin() + c.grid.dim);
    std::vector<double> hi(c.grid.hi.begin(), c.grid.hi.begin() + c.grid.dim);
    j["grid"] = {{"dim", c.grid.dim}, {"nodes", nodes}, {"lo", lo}, {"hi", hi}, {"offset", c.grid.offset}};
    j["bands"] = c.bands.indices;
    j["order"] = c.order;
    j["epsilons"] = c.epsilons;
    j["time"] = c.time_horizon;
    j["ensemble"] = {{"count", c.ensemble.count},
                     {"kinetic_bound", c.ensemble.kinetic_bound},
                     {"seed", c.ensemble.seed}};
    j["output"] = c.output_dir;
    j["gauge"] = gauge_to_string(c.gauge);
    j["scheme"] = scheme_to_string(c.scheme);
    j["refinement_check"] = c.refinement_check;
    j["local_tol"] = c.local_tol;
    j["r_min_cells"] = c.r_min_cells;
    return j;
}

namespace {

struct CurveData {
    std::vector<double> sup;
    std::vector<std::vector<double>> per_state;
};

void check_run(const PropagationResult& run, const char* what) {
    if (run.norm_drift > 1e-8)
        throw AccuracyError(std::string(what) + ": norm drift " + std::to_string(run.norm_drift));
    if (run.energy_drift > 1e-6)
        throw AccuracyError(std::string(what) + ": energy drift " + std::to_string(run.energy_drift));
}

CurveData measure_error_curve(const ExperimentConfig& config, int order, const Grid& grid) {
    const ElectronicModel model = make_model(config.model);
    config.bands.validate(model.dim_electronic);
    const int l = config.bands.count();
    if (order == 2 && l != 1) throw OrderError("order-2 error curves are one-band");

    EigenFrame ef = eigendecompose_smooth(model, grid, config.bands, config.gauge, 1e-6,
                                          config.r_min_cells);
    FiberField b;
    if (order == 2) b = build_b_field(model, grid, config.bands.indices[0], config.scheme);

    DtPolicy policy;
    policy.local_tol = config.local_tol;

    CurveData data;
    for (double eps : config.epsilons) {
        EffectiveHamiltonian heff =
            build_effective(model, grid, config.bands, order, eps, config.gauge, config.scheme,
                            MQuantization::Symmetric, config.r_min_cells);
        const Intertwiner u =
            order == 2 ? Intertwiner(ef.frame, b, eps, 1) : Intertwiner(ef.frame, eps);
        std::vector<double> errs;
        for (const NucleonicState& psi0 : nucleonic_ensemble(grid, l, eps, config.ensemble)) {
            const MolecularState big0 = u.embed(psi0);
            PropagationResult full = propagate_full(model, eps, big0, config.time_horizon, policy);
            check_run(full, "full propagation");
            PropagationResult eff = propagate_effective(heff, psi0, config.time_horizon, policy);
            check_run(eff, "effective propagation");
            WaveState diff = full.state;
            axpy(cplx{-1.0, 0.0}, u.embed(eff.state), diff);
            errs.push_back(norm(diff));
        }
        data.per_state.push_back(errs);
        data.sup.push_back(*std::max_element(errs.begin(), errs.end()));
    }
    return data;
}

CurveData measure_density_gap(const ExperimentConfig& config, int order, const Grid& grid) {
    const ElectronicModel model = make_model(config.model);
    config.bands.validate(model.dim_electronic);
    if (config.bands.count() != 1) throw OrderError("density study is one-band");

    EigenFrame ef = eigendecompose_smooth(model, grid, config.bands, config.gauge, 1e-6,
                                          config.r_min_cells);
    FiberField b;
    if (order == 2) b = build_b_field(model, grid, config.bands.indices[0], config.scheme);

    DtPolicy policy;
    policy.local_tol = config.local_tol;

    CurveData data;
    for (double eps : config.epsilons) {
        EffectiveHamiltonian heff =
            build_effective(model, grid, config.bands, order, eps, config.gauge, config.scheme,
                            MQuantization::Symmetric, config.r_min_cells);
        const Intertwiner u =
            order == 2 ? Intertwiner(ef.frame, b, eps, 1) : Intertwiner(ef.frame, eps);
        std::vector<double> gaps;
        for (const NucleonicState& psi0 : nucleonic_ensemble(grid, 1, eps, config.ensemble)) {
            const MolecularState big0 = u.embed(psi0);
            PropagationResult full = propagate_full(model, eps, big0, config.time_horizon, policy);
            check_run(full, "full propagation");
            PropagationResult eff = propagate_effective(heff, psi0, config.time_horizon, policy);
            check_run(eff, "effective propagation");
            const std::vector<double> rho = fiber_density(full.state);
            double gap = 0.0;
            for (long node = 0; node < grid.total_nodes(); ++node)
                gap = std::max(gap, std::abs(rho[node] - std::norm(eff.state.at(node, 0))));
            gaps.push_back(gap);
        }
        data.per_state.push_back(gaps);
        data.sup.push_back(*std::max_element(gaps.begin(), gaps.end()));
    }
    return data;
}

ScalingReport finish_report(const ExperimentConfig& config, const std::string& study,
                            CurveData main_data,
                            const std::function<CurveData(const Grid&)>& remeasure) {
    ScalingReport rep;
    rep.study = study;
    rep.config_echo = config_to_json(config);
    rep.epsilons = config.epsilons;
    rep.per_state = std::move(main_data.per_state);
    rep.sup_errors = std::move(main_data.sup);

    std::vector<std::pair<double, double>> curve;
    for (size_t i = 0; i < rep.epsilons.size(); ++i)
        curve.push_back({rep.epsilons[i], rep.sup_errors[i]});
    rep.fit = fit_slope(curve);
    rep.inconclusive = rep.fit.r_squared < 0.98;

    if (config.refinement_check) {
        rep.refinement_checked = true;
        const CurveData fine = remeasure(config.grid.doubled().to_grid());
        std::vector<std::pair<double, double>> fine_curve;
        for (size_t i = 0; i < rep.epsilons.size(); ++i)
            fine_curve.push_back({rep.epsilons[i], fine.sup[i]});
        rep.refined_slope = fit_slope(fine_curve).slope;
        rep.slope_delta = std::abs(rep.refined_slope - rep.fit.slope);
        rep.refinement_stable = rep.slope_delta <= 0.15;
        if (!rep.refinement_stable) rep.inconclusive = true;
    }
    return rep;
}

}  // namespace

ScalingReport error_curve(const ExperimentConfig& config, int order) {
    validate_config(config);
    const auto t0 = std::chrono::steady_clock::now();
    ScalingReport rep = finish_report(
        config, "error_curve_order" + std::to_string(order),
        measure_error_curve(config, order, config.grid.to_grid()),
        [&](const Grid& g) { return measure_error_curve(config, order, g); });
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

ScalingReport density_gap(const ExperimentConfig& config) {
    validate_config(config);
    const auto t0 = std::chrono::steady_clock::now();
    ScalingReport rep = finish_report(
        config, "density_gap_order" + std::to_string(config.order),
        measure_density_gap(config, config.order, config.grid.to_grid()),
        [&](const Grid& g) { return measure_density_gap(config, config.order, g); });
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::vector<std::pair<std::string, ScalingReport>> defect_study(const ExperimentConfig& config) {
    validate_config(config);
    const auto t0 = std::chrono::steady_clock::now();
    const ElectronicModel model = make_model(config.model);
    const Grid grid = config.grid.to_grid();
    const int band = config.bands.indices[0];

    auto [idem, comm] =
        projector_defect(model, grid, band, config.epsilons, config.ensemble, 1, config.scheme);
    DefectMeasurement unit =
        unitarity_defect(model, grid, band, config.epsilons, config.ensemble, 1, config.scheme);

    auto wrap = [&](const std::string& name, const DefectMeasurement& m) {
        ScalingReport rep;
        rep.study = name;
        rep.config_echo = config_to_json(config);
        rep.epsilons = m.epsilons;
        rep.sup_errors = m.defects;
        for (double d : m.defects) rep.per_state.push_back({d});
        std::vector<std::pair<double, double>> curve;
        for (size_t i = 0; i < m.epsilons.size(); ++i) curve.push_back({m.epsilons[i], m.defects[i]});
        try {
            rep.fit = fit_slope(curve);
            rep.inconclusive = rep.fit.r_squared < 0.98;
        } catch (const DegenerateFit&) {
            rep.inconclusive = true;
        }
        return rep;
    };
    std::vector<std::pair<std::string, ScalingReport>> out;
    out.emplace_back("idempotency_defect", wrap("idempotency_defect", idem));
    out.emplace_back("commutator_defect", wrap("commutator_defect", comm));
    out.emplace_back("unitarity_defect", wrap("unitarity_defect", unit));
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& [name, rep] : out) rep.wall_seconds = wall;
    return out;
}

std::vector<std::pair<std::string, ScalingReport>> run_study(const ExperimentConfig& config) {
    std::vector<std::pair<std::string, ScalingReport>> out;
    if (config.study == "error_curve") {
        ScalingReport rep = error_curve(config, config.order);
        out.emplace_back(rep.study, std::move(rep));
    } else if (config.study == "density_gap") {
        ScalingReport rep = density_gap(config);
        out.emplace_back(rep.study, std::move(rep));
    } else if (config.study == "defects") {
        out = defect_study(config);
    } else {
        throw ConfigError("unknown study '" + config.study + "'");
    }
    return out;
}

ConicalStudyResult conical_correction_study(const ConicalStudyConfig& config) {
    const Grid grid = config.grid.to_grid();
    if (grid.dim != 2) throw ConfigError("conical study needs a 2d grid");
    const double C = config.C, eps = config.eps;

    auto build = [&](bool upper, int order, bool with_phi, bool with_mass) {
        return conical_effective_closed_form(C, grid, upper, order, eps, MQuantization::AngularLgL,
                                             config.r_min_cells, with_phi, with_mass);
    };

    // Near-circular-orbit packet: tangential momentum sqrt(C r0) at (r0, 0).
    PacketSpec spec;
    spec.center = {config.packet_radius, 0.0};
    spec.sigma = config.packet_sigma;
    spec.momentum = {0.0, std::sqrt(C * config.packet_radius)};
    const NucleonicState psi0 = gaussian_packet(grid, spec, eps);

    DtPolicy policy;
    policy.local_tol = config.local_tol;

    auto radial_expectation = [&](const WaveState& psi) {
        double r_mean = 0.0;
        for (long node = 0; node < grid.total_nodes(); ++node) {
            const Point x = grid.point(node);
            r_mean += std::hypot(x[0], x[1]) * std::norm(psi.at(node, 0));
        }
        return r_mean * grid.cell_volume() / norm_sq(psi);
    };

    ConicalStudyResult res;
    const int k = std::max(1, config.checkpoints);
    const double dt = config.time_horizon / k;
    for (int i = 0; i <= k; ++i) res.times.push_back(i * dt);

    auto run_variant = [&](const EffectiveHamiltonian& h, std::vector<double>& traj) {
        WaveState psi = psi0;
        traj.push_back(radial_expectation(psi));
        for (int i = 0; i < k; ++i) {
            PropagationResult r = propagate_effective(h, psi, dt, policy);
            psi = std::move(r.state);
            traj.push_back(radial_expectation(psi));
        }
    };

    run_variant(build(true, 1, false, false), res.radius_upper_order1);
    run_variant(build(true, 2, true, false), res.radius_upper_phi);
    run_variant(build(true, 2, true, true), res.radius_upper_full);
    run_variant(build(false, 1, false, false), res.radius_lower_order1);
    run_variant(build(false, 2, true, false), res.radius_lower_phi);
    run_variant(build(false, 2, true, true), res.radius_lower_full);

    res.upper_inequality = res.radius_upper_full.back() >= res.radius_upper_phi.back() - 1e-12;
    res.lower_inequality = res.radius_lower_full.back() <= res.radius_lower_phi.back() + 1e-12;

    // Zero-angular-momentum probe: a real radial ring state.
    WaveState ring(grid, 1, eps);
    for (long node = 0; node < grid.total_nodes(); ++node) {
        const Point x = grid.point(node);
        const double r = std::hypot(x[0], x[1]);
        const double d = r - config.packet_radius;
        ring.at(node, 0) = std::exp(-d * d / (4.0 * config.packet_sigma * config.packet_sigma));
    }
    normalize(ring);
    const EffectiveHamiltonian h_full = build(true, 2, true, true);
    const EffectiveHamiltonian h_phi = build(true, 2, true, false);
    const EffectiveHamiltonian h_o1 = build(true, 1, false, false);
    WaveState m_action = h_full.apply(ring);
    axpy(cplx{-1.0, 0.0}, h_phi.apply(ring), m_action);
    WaveState phi_action = h_phi.apply(ring);
    axpy(cplx{-1.0, 0.0}, h_o1.apply(ring), phi_action);
    res.m_action_ratio = norm(m_action) / norm(phi_action);
    return res;
}

void write_report_json(const std::string& path, const ScalingReport& rep) {
    json j;
    j["study"] = rep.study;
    j["config"] = rep.config_echo;
    j["epsilons"] = rep.epsilons;
    j["sup_errors"] = rep.sup_errors;
    j["per_state"] = rep.per_state;
    j["fit"] = {{"slope", rep.fit.slope},
                {"intercept", rep.fit.intercept},
                {"r_squared", rep.fit.r_squared},
                {"ci95_half_width", rep.fit.ci_half_width},
                {"excluded_points", rep.fit.excluded_points},
                {"inconclusive", rep.inconclusive}};
    j["refinement"] = {{"checked", rep.refinement_checked},
                       {"slope_refined", rep.refined_slope},
                       {"delta", rep.slope_delta},
                       {"stable", rep.refinement_stable}};
    j["timing"] = {{"wall_seconds", rep.wall_seconds}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << j.dump(2) << '\n';
}

void write_report_csv(const std::string& path, const ScalingReport& rep) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out << "epsilon,state_index,error\n";
    char buf[64];
    for (size_t e = 0; e < rep.epsilons.size(); ++e)
        for (size_t s = 0; s < rep.per_state[e].size(); ++s) {
            std::snprintf(buf, sizeof(buf), "%.17g", rep.epsilons[e]);
            out << buf << ',' << s << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", rep.per_state[e][s]);
            out << buf << '\n';
        }
}

int run_experiment(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config " + config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    ExperimentConfig config = config_from_json(j);
    validate_config(config);

    std::filesystem::create_directories(config.output_dir);
    const auto reports = run_study(config);
    bool inconclusive = false;
    for (const auto& [name, rep] : reports) {
        write_report_json(config.output_dir + "/" + name + ".json", rep);
        write_report_csv(config.output_dir + "/" + name + ".csv", rep);
        std::printf("%-24s slope % .4f  r2 %.5f  %s\n", name.c_str(), rep.fit.slope,
                    rep.fit.r_squared, rep.inconclusive ? "INCONCLUSIVE" : "ok");
        inconclusive = inconclusive || rep.inconclusive;
    }
    return inconclusive ? 2 : 0;
}

}  // namespace boa
