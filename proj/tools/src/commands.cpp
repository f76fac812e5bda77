#include "sbsim_cli/commands.hpp"

#include "sbsim_cli/csv.hpp"

#include <sbsim/errors.hpp>
#include <sbsim/units.hpp>

#include <cmath>
#include <fstream>
#include <limits>

namespace sbsim::cli {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// Runs a core constructor/validator and turns its complaint into a schema issue.
template <typename F>
void guarded(ParseLog& log, const std::string& path, F&& f) {
    try {
        f();
    } catch (const std::invalid_argument& e) {
        log.issue(path, e.what());
    }
}

spectral::LorentzianComponent parse_component(Node n, ParseLog& log) {
    spectral::LorentzianComponent c;
    c.lambda = n.frequency("lambda");
    c.kappa = n.frequency("kappa");
    c.omega_m = n.frequency("omega_m");
    n.finish();
    guarded(log, n.path(), [&] { c.validate(); });
    return c;
}

spectral::CompositeSpectralDensity parse_components(Node& parent, ParseLog& log) {
    spectral::CompositeSpectralDensity d;
    for (auto& n : parent.children("components")) d.components.push_back(parse_component(std::move(n), log));
    if (parent.has("components") && d.components.empty()) log.issue(parent.path() + ".components", "needs at least one component");
    return d;
}

double parse_hbar_beta(Node t, double reference_omega, ParseLog& log) {
    double hb = 0.0;
    if (t.has("hbar_beta_s")) {
        hb = t.positive("hbar_beta_s");
    } else {
        const double nbar = t.positive("nbar");
        const double ref = t.frequency("reference_omega", to_hz(reference_omega));
        guarded(log, t.path(), [&] { hb = correlation::nbar_to_hbar_beta(nbar, ref); });
    }
    t.finish();
    return hb;
}

TimeGrid parse_time(Node t, double delta, ParseLog& log) {
    TimeGrid g;
    if (t.has("t_end_s")) {
        g.t_end = t.positive("t_end_s");
    } else {
        const double natural = t.positive("t_end_natural");
        if (delta == 0.0) {
            log.issue(t.path() + ".t_end_natural", "needs a non-zero Rabi frequency; use t_end_s");
        } else {
            g.t_end = natural / std::abs(delta);
        }
    }
    g.steps = t.count("steps");
    if (g.steps < 1) log.issue(t.path() + ".steps", "must be >= 1");
    t.finish();
    return g;
}

lindblad::SpinParams parse_spin(Node s) {
    lindblad::SpinParams p;
    p.epsilon_over_hbar = s.frequency("epsilon", 0.0);
    p.delta_rabi = s.frequency("delta", 0.0);
    s.finish();
    return p;
}

std::vector<lindblad::ModeSpec> parse_modes(Node& root, ParseLog& log) {
    std::vector<lindblad::ModeSpec> modes;
    for (auto& n : root.children("modes")) {
        lindblad::ModeSpec m;
        m.omega_m = n.frequency("omega_m");
        m.lambda = n.frequency("lambda");
        m.kappa = n.frequency("kappa", 0.0);
        m.nbar = n.number("nbar", 0.0);
        m.n_max = n.count("n_max", 15);
        n.finish();
        guarded(log, n.path(), [&] { m.validate(); });
        modes.push_back(m);
    }
    return modes;
}

lindblad::SpinStateTag parse_tag(const json& v, const std::string& path, ParseLog& log) {
    if (!v.is_string()) {
        log.issue(path, "expected a spin state name");
        return lindblad::SpinStateTag::up;
    }
    try {
        return lindblad::parse_spin_state(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
        log.issue(path, e.what());
        return lindblad::SpinStateTag::up;
    }
}

// A state name, or {"bloch": [x, y, z]} with |r| <= 1.
Eigen::Matrix2cd parse_spin_state(Node& root, ParseLog& log) {
    const std::string path = root.path().empty() ? "initial_state" : root.path() + ".initial_state";
    const json* v = root.raw("initial_state");
    if (v == nullptr) {
        log.resolved.emplace_back(path, "up (default)");
        return lindblad::spin_projector(lindblad::SpinStateTag::up);
    }
    if (v->is_object()) {
        Node b(*v, path, log);
        const auto r = b.numbers("bloch");
        b.finish();
        if (r.size() != 3) {
            log.issue(path + ".bloch", "expected three components");
            return lindblad::spin_projector(lindblad::SpinStateTag::up);
        }
        if (r[0] * r[0] + r[1] * r[1] + r[2] * r[2] > 1.0 + 1e-12) log.issue(path + ".bloch", "Bloch vector longer than 1");
        return 0.5 * (Eigen::Matrix2cd::Identity() + r[0] * lindblad::pauli_x() + r[1] * lindblad::pauli_y() +
                      r[2] * lindblad::pauli_z());
    }
    const auto tag = parse_tag(*v, path, log);
    log.resolved.emplace_back(path, std::string(lindblad::to_string(tag)));
    return lindblad::spin_projector(tag);
}

lindblad::SystemSpec parse_system(Node& root, ParseLog& log) {
    lindblad::SystemSpec s;
    s.spin = parse_spin(root.child("spin"));
    s.modes = parse_modes(root, log);
    s.dimension_cap = root.count("dimension_cap", 1024);
    if (!log.issues.empty()) return s;  // the mode checks already said it
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        log.issue("<root>", e.what());
    } catch (const CapExceeded&) {
        // Left for run time so that --dry-run can still show the table.
    }
    return s;
}

lindblad::EvolveOptions parse_evolve(Node& root) {
    lindblad::EvolveOptions o;
    o.tolerance = root.positive("tolerance", o.tolerance);
    return o;
}

SdConfig parse_sd(Node& root, ParseLog& log) {
    SdConfig c;
    c.density = parse_components(root, log);
    const double ref = c.density.components.empty() ? 1.0 : c.density.max_omega_m();
    c.hbar_beta = parse_hbar_beta(root.child("temperature"), ref, log);
    auto g = root.child("grid");
    c.omega_min = g.frequency("omega_min", 0.0);
    c.omega_max = g.frequency("omega_max", to_hz(2.0 * ref));
    c.points = g.count("points", 401);
    g.finish();
    if (!(c.omega_max > c.omega_min) || c.omega_min < 0.0) log.issue(g.path(), "need 0 <= omega_min_hz < omega_max_hz");
    if (c.points < 2) log.issue(g.path() + ".points", "must be >= 2");
    return c;
}

SdFitConfig parse_sd_fit(Node& root, ParseLog& log) {
    SdFitConfig c;
    auto t = root.child("target");
    const std::string type = t.text("type");
    guarded(log, t.path(), [&] {
        if (type == "lorentzian_sum") {
            c.target.emplace(spectral::LorentzianSumTarget{parse_components(t, log)});
        } else if (type == "flat_band") {
            spectral::FlatBandTarget f;
            f.level = t.positive("level");
            f.lo = t.frequency("lo");
            f.hi = t.frequency("hi");
            c.target.emplace(f);
        } else if (type == "tabulated") {
            spectral::TabulatedTarget tab;
            tab.omega = t.frequencies("omega");
            tab.value = t.numbers("value");
            c.target.emplace(std::move(tab));
        } else {
            log.issue(t.path() + ".type", "expected lorentzian_sum, flat_band or tabulated");
        }
    });
    t.finish();
    c.n_components = root.count("n_components");
    if (c.n_components < 1) log.issue("n_components", "must be >= 1");
    if (root.has("seeds")) {
        for (auto& n : root.children("seeds")) c.seeds.push_back(parse_component(std::move(n), log));
        if (c.seeds.size() != c.n_components) log.issue("seeds", "needs exactly n_components entries");
    }
    c.grid_points = root.count("grid_points", 2000);
    if (c.grid_points < 3) log.issue("grid_points", "must be >= 3");
    c.options.restarts = root.count("restarts", c.options.restarts);
    c.options.seed = root.count("seed", c.options.seed);
    c.options.max_iterations = root.count("max_iterations", c.options.max_iterations);
    c.options.tolerance = root.positive("tolerance", c.options.tolerance);
    return c;
}

CorrConfig parse_corr(Node& root, ParseLog& log) {
    CorrConfig c;
    auto b = root.child("bath");
    c.bath.omega_m = b.frequency("omega_m");
    c.bath.kappa = b.frequency("kappa");
    c.bath.lambda = b.frequency("lambda");
    c.bath.n_matsubara = b.count("n_matsubara", 10000);
    if (b.has("hbar_beta_s")) {
        c.bath.hbar_beta = b.positive("hbar_beta_s");
    } else {
        const double nbar = b.positive("nbar");
        guarded(log, b.path(), [&] { c.bath.hbar_beta = correlation::nbar_to_hbar_beta(nbar, c.bath.omega_m); });
    }
    b.finish();
    guarded(log, b.path(), [&] { c.bath.validate(); });
    c.grid = parse_time(root.child("time"), 0.0, log);
    return c;
}

CorrDistConfig parse_corr_dist(Node& root, ParseLog& log) {
    CorrDistConfig c;
    c.omega_m = root.frequency("omega_m");
    c.kappas = root.frequencies("kappa");
    c.nbars = root.numbers("nbar");
    c.n_matsubara = root.count("n_matsubara", 10000);
    if (!(c.omega_m > 0.0)) log.issue("omega_m_hz", "must be > 0");
    for (double k : c.kappas) {
        if (!(k > 0.0) || !(k < c.omega_m)) log.issue("kappa_hz", "every value must lie in (0, omega_m_hz)");
    }
    for (double n : c.nbars) {
        if (!(n > 0.0)) log.issue("nbar", "every value must be > 0");
    }
    if (c.n_matsubara < 1) log.issue("n_matsubara", "must be >= 1");
    return c;
}

SimulateConfig parse_simulate(Node& root, ParseLog& log) {
    SimulateConfig c;
    c.system = parse_system(root, log);
    c.spin0 = parse_spin_state(root, log);
    c.grid = parse_time(root.child("time"), c.system.spin.delta_rabi, log);
    c.evolve = parse_evolve(root);
    c.truncation_audit = root.flag("truncation_audit", false);
    c.audit_extra = root.count("audit_extra_levels", 5);
    return c;
}

NonmarkovConfig parse_nonmarkov(Node& root, ParseLog& log) {
    NonmarkovConfig c;
    c.system = parse_system(root, log);
    c.evolve = parse_evolve(root);
    auto measure = [&](const std::string& key) -> std::optional<MeasureGrid> {
        auto n = root.optional_child(key);
        if (!n) return std::nullopt;
        MeasureGrid m;
        m.threshold = n->non_negative("threshold", nonmarkov::default_threshold);
        if (key == "blp" && n->has("pairs")) {
            const json* p = n->raw("pairs");
            if (!p->is_array() || p->empty()) {
                log.issue(n->path() + ".pairs", "expected a non-empty array of [state, state]");
            } else {
                for (std::size_t i = 0; i < p->size(); ++i) {
                    const std::string path = n->path() + ".pairs." + std::to_string(i);
                    const auto& e = (*p)[i];
                    if (!e.is_array() || e.size() != 2) {
                        log.issue(path, "expected [state, state]");
                        continue;
                    }
                    c.pairs.push_back({parse_tag(e[0], path + ".0", log), parse_tag(e[1], path + ".1", log)});
                }
            }
        } else if (key == "blp") {
            c.pairs = nonmarkov::canonical_pairs();
            log.resolved.emplace_back(n->path() + ".pairs", "up/down, plus_x/minus_x, plus_y/minus_y (default)");
        }
        // The grid keys live next to threshold and pairs.
        TimeGrid g;
        if (n->has("t_end_s")) {
            g.t_end = n->positive("t_end_s");
        } else {
            const double natural = n->positive("t_end_natural");
            if (c.system.spin.delta_rabi == 0.0) {
                log.issue(n->path() + ".t_end_natural", "needs a non-zero Rabi frequency; use t_end_s");
            } else {
                g.t_end = natural / std::abs(c.system.spin.delta_rabi);
            }
        }
        g.steps = n->count("steps");
        if (g.steps < 1) log.issue(n->path() + ".steps", "must be >= 1");
        m.grid = g;
        n->finish();
        return m;
    };
    c.rhp = measure("rhp");
    c.blp = measure("blp");
    if (!c.rhp && !c.blp) log.issue("<root>", "needs an 'rhp' or a 'blp' block");
    return c;
}

IonParamsConfig parse_ion_params(Node& root, ParseLog& log) {
    IonParamsConfig c;
    auto cr = root.child("crystal");
    c.crystal.mass_1 = cr.positive("mass_1_amu", 24.0);
    c.crystal.mass_2 = cr.positive("mass_2_amu", 25.0);
    c.crystal.mass_ref = cr.positive("mass_ref_amu", c.crystal.mass_1);
    c.crystal.omega_com_ref = cr.frequency("omega_com_ref");
    cr.finish();
    guarded(log, cr.path(), [&] { c.crystal.validate(); });

    c.spin_ion = root.count("spin_ion", 1);
    if (c.spin_ion > 1) log.issue("spin_ion", "must be 0 or 1");
    c.spin_ion_mass = c.spin_ion == 0 ? c.crystal.mass_1 : c.crystal.mass_2;
    c.mode = root.count("mode", 2);
    if (c.mode != 1 && c.mode != 2) log.issue("mode", "must be 1 (in phase) or 2 (out of phase)");

    auto l = root.child("lasers");
    c.lasers.wavelength = l.positive("wavelength_m", 280e-9);
    c.lasers.geometry_angle = l.number("geometry_angle_deg", 90.0) * std::numbers::pi / 180.0;
    c.lasers.omega_odf = l.frequency("omega_odf");
    c.lasers.detuning_delta_m = l.frequency("detuning_delta_m");
    c.lasers.big_detuning = l.frequency("big_detuning", 0.0);
    c.gamma_up = l.frequency("gamma_up", 0.0);
    c.gamma_down = l.frequency("gamma_down", 0.0);
    c.lasers.gamma = c.gamma_up + c.gamma_down;
    if (const json* r = l.raw("rabi_hz")) {
        iontrap::RabiTable table;
        bool ok = r->is_array() && r->size() >= 2;
        if (ok) {
            for (const auto& beam : *r) {
                if (!beam.is_array() || beam.size() != 2 || !beam[0].is_number() || !beam[1].is_number()) {
                    ok = false;
                    break;
                }
                table.omega.push_back({iontrap::cplx{hz(beam[0].get<double>()), 0.0},
                                       iontrap::cplx{hz(beam[1].get<double>()), 0.0}});
            }
        }
        if (!ok) {
            log.issue(l.path() + ".rabi_hz", "expected at least two [up, down] pairs of numbers");
        } else {
            c.rabi = std::move(table);
            log.resolved.emplace_back(l.path() + ".rabi_hz", r->dump());
        }
    }
    l.finish();
    guarded(log, l.path(), [&] { c.lasers.validate(); });
    if (!(c.lasers.detuning_delta_m > 0.0)) log.issue(l.path() + ".detuning_delta_m_hz", "must be > 0");
    if (c.rabi && !(c.lasers.big_detuning > 0.0)) log.issue(l.path() + ".big_detuning_hz", "needed with rabi_hz");

    auto b = root.child("bath");
    c.kappa = b.frequency("kappa");
    c.nbar = b.non_negative("nbar", 0.0);
    b.finish();
    return c;
}

ChainConfig parse_chain_block(Node& root, ParseLog& log) {
    ChainConfig c;
    c.density = parse_components(root, log);
    c.omega_max = root.frequency("omega_max");
    if (!(c.omega_max > 0.0)) log.issue("omega_max_hz", "must be > 0");
    c.n_nodes = root.count("n_nodes", 2000);
    c.n_chain = root.count("n_chain", 15);
    c.discretization.panel_order = root.count("panel_order", 20);
    if (c.discretization.panel_order < 1) log.issue("panel_order", "must be >= 1");
    if (root.flag("focus", true)) c.discretization = [&] {
        auto o = chainmap::lorentzian_focus(c.density);
        o.panel_order = c.discretization.panel_order;
        return o;
    }();
    c.discretization.focus_fraction = root.number("focus_fraction", 0.5);
    if (c.n_chain < 1 || 2 * c.n_chain > c.n_nodes) log.issue("n_chain", "must lie in [1, n_nodes/2]");
    return c;
}

ChainEvolveConfig parse_chain_evolve(Node& root, ParseLog& log) {
    ChainEvolveConfig c;
    c.chain = parse_chain_block(root, log);
    c.spin = parse_spin(root.child("spin"));
    lindblad::SpinStateTag tag = lindblad::SpinStateTag::up;
    if (const json* v = root.raw("initial_state")) {
        tag = parse_tag(*v, "initial_state", log);
    }
    log.resolved.emplace_back("initial_state", std::string(lindblad::to_string(tag)));
    c.spin0 = lindblad::spin_ket(tag);
    c.grid = parse_time(root.child("time"), c.spin.delta_rabi, log);
    c.evolution.n_sites = root.count("n_sites", c.evolution.n_sites);
    c.evolution.d_max = root.count("d_max", c.evolution.d_max);
    c.evolution.dimension_cap = root.count("dimension_cap", c.evolution.dimension_cap);
    c.evolution.tolerance = root.positive("tolerance", c.evolution.tolerance);
    if (c.evolution.n_sites < 1 || c.evolution.n_sites > c.chain.n_chain) log.issue("n_sites", "must lie in [1, n_chain]");
    if (c.evolution.d_max < 1) log.issue("d_max", "must be >= 1");
    return c;
}

// --------------------------------- execution ---------------------------------

std::vector<std::string> with(const std::vector<std::string>& base, std::vector<std::string> extra) {
    std::vector<std::string> out = base;
    out.insert(out.end(), extra.begin(), extra.end());
    return out;
}

std::ostream& log_of(const OutputContext& ctx) {
    static std::ofstream null_stream;
    return ctx.log != nullptr ? *ctx.log : null_stream;
}

void run(const SdConfig& c, const OutputContext& ctx) {
    Series s;
    std::vector<double> w_hz, j, jt, eps;
    for (std::size_t i = 0; i < c.points; ++i) {
        const double w = c.omega_min + (c.omega_max - c.omega_min) * static_cast<double>(i) / static_cast<double>(c.points - 1);
        const double jv = c.density(w);
        double jtv = 0.0;
        for (const auto& comp : c.density.components) jtv += spectral::eval_regression_sd(comp, c.hbar_beta, w);
        w_hz.push_back(to_hz(w));
        j.push_back(jv);
        jt.push_back(jtv);
        eps.push_back(jv > 0.0 ? std::abs(jtv - jv) / jv : nan_value);
    }
    s.add("omega_hz", std::move(w_hz));
    s.add("j_eff", std::move(j));
    s.add("j_tilde", std::move(jt));
    s.add("epsilon_j", std::move(eps));
    emit_csv(s, ctx.dir / "sd.csv", with(ctx.comments, {"j_eff and j_tilde in rad/s; epsilon_j = |j_tilde - j_eff| / j_eff"}));
    log_of(ctx) << "wrote " << (ctx.dir / "sd.csv").string() << '\n';
}

json components_json(const spectral::CompositeSpectralDensity& d) {
    json arr = json::array();
    for (const auto& c : d.components) {
        arr.push_back({{"lambda_hz", to_hz(c.lambda)}, {"kappa_hz", to_hz(c.kappa)}, {"omega_m_hz", to_hz(c.omega_m)}});
    }
    return arr;
}

void write_fit(const spectral::FitResult& r, const SdFitConfig& c, const std::vector<double>& grid, const OutputContext& ctx) {
    json out;
    out["components"] = components_json(r.density);
    out["residual"] = r.residual;
    out["converged"] = r.converged;
    out["iterations"] = r.iterations;
    out["restart"] = r.restart;
    json prov = json::object();
    for (const auto& line : ctx.comments) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) prov[line.substr(0, eq)] = line.substr(eq + 1);
    }
    out["provenance"] = prov;
    std::ofstream f(ctx.dir / "sd_fit.json", std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (ctx.dir / "sd_fit.json").string());
    f << out.dump(2) << '\n';

    Series s;
    std::vector<double> w_hz, target, fit;
    for (double w : grid) {
        w_hz.push_back(to_hz(w));
        target.push_back((*c.target)(w));
        fit.push_back(r.density(w));
    }
    s.add("omega_hz", std::move(w_hz));
    s.add("j_target", std::move(target));
    s.add("j_fit", std::move(fit));
    emit_csv(s, ctx.dir / "sd_fit.csv", ctx.comments);
}

void run(const SdFitConfig& c, const OutputContext& ctx) {
    const auto grid = spectral::default_fit_grid(*c.target, c.grid_points);
    auto opts = c.options;
    opts.threads = ctx.threads;
    try {
        const auto r = spectral::fit_spectral_density(*c.target, c.n_components, grid, c.seeds, opts);
        write_fit(r, c, grid, ctx);
        log_of(ctx) << "residual = " << format_number(r.residual) << '\n';
    } catch (const spectral::FitError& e) {
        write_fit(e.best(), c, grid, ctx);
        throw NumericalError(std::string("fit did not converge (best-so-far written): ") + e.what());
    }
}

void run(const CorrConfig& c, const OutputContext& ctx) {
    Series s;
    std::vector<double> t, ore, oim, lre, lim;
    for (double ti : c.grid.times()) {
        const auto o = correlation::l_ohmic(c.bath, ti);
        const auto l = correlation::l_lindblad(c.bath, ti);
        t.push_back(ti);
        ore.push_back(o.real);
        oim.push_back(o.imag);
        lre.push_back(l.real);
        lim.push_back(l.imag);
    }
    s.add("t_s", std::move(t));
    s.add("l_ohmic_re", std::move(ore));
    s.add("l_ohmic_im", std::move(oim));
    s.add("l_lindblad_re", std::move(lre));
    s.add("l_lindblad_im", std::move(lim));
    emit_csv(s, ctx.dir / "corr.csv", with(ctx.comments, {"correlation functions in rad^2/s^2"}));
    log_of(ctx) << "wrote " << (ctx.dir / "corr.csv").string() << '\n';
}

void run(const CorrDistConfig& c, const OutputContext& ctx) {
    Series s;
    std::vector<double> k_hz, nb, d;
    for (double k : c.kappas) {
        for (double n : c.nbars) {
            correlation::BathParams p;
            p.omega_m = c.omega_m;
            p.kappa = k;
            p.lambda = 1.0;
            p.hbar_beta = correlation::nbar_to_hbar_beta(n, c.omega_m);
            p.n_matsubara = c.n_matsubara;
            k_hz.push_back(to_hz(k));
            nb.push_back(n);
            d.push_back(correlation::distance_d(p));
        }
    }
    s.add("kappa_hz", std::move(k_hz));
    s.add("nbar", std::move(nb));
    s.add("d_s", std::move(d));
    emit_csv(s, ctx.dir / "corr_dist.csv", ctx.comments);
    log_of(ctx) << "wrote " << (ctx.dir / "corr_dist.csv").string() << '\n';
}

void run(const SimulateConfig& c, const OutputContext& ctx) {
    c.system.validate();
    const auto times = c.grid.times();
    const auto traj = lindblad::sigma_z_trajectory(c.system, lindblad::product_state(c.spin0, c.system), times, c.evolve);
    Series s;
    std::vector<double> t, tn, sz, tr, me;
    for (const auto& p : traj) {
        t.push_back(p.t);
        tn.push_back(c.system.spin.delta_rabi * p.t);
        sz.push_back(p.sigma_z);
        tr.push_back(p.trace_error);
        me.push_back(p.min_eigenvalue);
    }
    s.add("t_s", std::move(t));
    s.add("t_natural", std::move(tn));
    s.add("sigma_z", std::move(sz));
    s.add("trace_err", std::move(tr));
    s.add("min_eig", std::move(me));
    emit_csv(s, ctx.dir / "simulate.csv", ctx.comments);
    log_of(ctx) << "wrote " << (ctx.dir / "simulate.csv").string() << '\n';

    if (c.truncation_audit) {
        const auto audit = lindblad::truncation_audit(c.system, c.spin0, times, c.audit_extra, c.evolve);
        Series a;
        a.add("extra_levels", {static_cast<double>(audit.extra_levels)});
        a.add("max_deviation", {audit.max_deviation});
        emit_csv(a, ctx.dir / "simulate_audit.csv", ctx.comments);
        log_of(ctx) << "truncation audit: max |delta sigma_z| = " << format_number(audit.max_deviation) << " with "
                    << audit.extra_levels << " extra levels\n";
    }
}

std::string column_label(const nonmarkov::StatePair& p) {
    std::string s = "D_" + nonmarkov::pair_label(p);
    for (auto& ch : s) {
        if (ch == '/') ch = '_';
    }
    return s;
}

void run(const NonmarkovConfig& c, const OutputContext& ctx) {
    c.system.validate();
    std::vector<std::string> summary;
    if (c.rhp) {
        const auto times = c.rhp->grid.times();
        const auto series = nonmarkov::reconstruct_maps(c.system, times, c.evolve);
        const auto g = nonmarkov::g_series(series, c.rhp->threshold);
        Series s;
        s.add("t_s", std::vector<double>(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(g.size())));
        s.add("g", g);
        emit_csv(s, ctx.dir / "nonmarkov_rhp.csv", ctx.comments);
        summary.push_back("N_RHP=" + format_number(nonmarkov::n_rhp(g)));
    }
    if (c.blp) {
        const auto times = c.blp->grid.times();
        const auto r = nonmarkov::n_blp_lower_bound(c.system, c.pairs, times, c.blp->threshold, c.evolve);
        Series s;
        s.add("t_s", times);
        for (const auto& p : r.pairs) s.add(column_label(p.pair), p.distance);
        emit_csv(s, ctx.dir / "nonmarkov_blp.csv", ctx.comments);
        summary.push_back("N_BLP=" + format_number(r.max));
        for (const auto& p : r.pairs) summary.push_back("N_BLP[" + nonmarkov::pair_label(p.pair) + "]=" + format_number(p.measure));
    }
    std::ofstream f(ctx.dir / "nonmarkov_summary.txt", std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (ctx.dir / "nonmarkov_summary.txt").string());
    for (const auto& line : ctx.comments) f << "# " << line << '\n';
    for (const auto& line : summary) {
        f << line << '\n';
        log_of(ctx) << line << '\n';
    }
}

struct IonNumbers {
    iontrap::AxialModes modes;
    std::array<double, 2> eta{};
    double lambda{0.0};
    double omega_l{0.0};
    std::optional<iontrap::EffectiveRabi> rabi;
    std::optional<iontrap::ScatteringRates> scattering;
};

IonNumbers ion_numbers(const IonParamsConfig& c) {
    IonNumbers n;
    n.modes = iontrap::axial_normal_modes(c.crystal);
    n.eta = iontrap::lamb_dicke(n.modes, c.lasers, c.spin_ion, c.spin_ion_mass);
    const std::size_t m = c.mode - 1;
    n.lambda = iontrap::spin_motion_coupling(n.eta[m], c.lasers.omega_odf);
    n.omega_l = n.modes.omega(m) + c.lasers.detuning_delta_m;
    if (c.rabi) {
        n.rabi = iontrap::effective_rabi_frequencies(*c.rabi, c.lasers.big_detuning, c.lasers.gamma);
        if (c.gamma_up + c.gamma_down > 0.0) {
            n.scattering = iontrap::scattering_rates(*c.rabi, c.lasers.big_detuning, c.gamma_up, c.gamma_down);
        }
    }
    return n;
}

iontrap::RegimeReport ion_regime(const IonParamsConfig& c) {
    const auto n = ion_numbers(c);
    iontrap::RegimeInputs in;
    in.omega_m = c.lasers.detuning_delta_m;
    in.kappa = c.kappa;
    in.nbar = c.nbar;
    const std::size_t spectator = c.mode == 1 ? 1 : 0;
    in.omega_1 = n.modes.omega(spectator);
    in.eta_1 = n.eta[spectator];
    in.omega_L = n.omega_l;
    in.omega_odf = c.lasers.omega_odf;
    if (c.lasers.gamma > 0.0 && c.lasers.big_detuning > 0.0) {
        in.gamma = c.lasers.gamma;
        in.big_detuning = c.lasers.big_detuning;
    }
    return iontrap::regime_check(in);
}

void run(const IonParamsConfig& c, const OutputContext& ctx) {
    const auto n = ion_numbers(c);
    Series s;
    s.add("omega_1_hz", {to_hz(n.modes.omega_1)});
    s.add("omega_2_hz", {to_hz(n.modes.omega_2)});
    s.add("eta_1", {n.eta[0]});
    s.add("eta_2", {n.eta[1]});
    s.add("lambda_hz", {to_hz(n.lambda)});
    s.add("omega_L_hz", {to_hz(n.omega_l)});
    s.add("omega_odf_beams_hz", {n.rabi ? to_hz(std::abs(n.rabi->omega_odf)) : nan_value});
    s.add("gamma_eff_hz", {n.scattering ? to_hz(n.scattering->gamma_eff) : nan_value});
    emit_csv(s, ctx.dir / "ion_params.csv", ctx.comments);

    const auto report = ion_regime(c);
    std::ofstream f(ctx.dir / "ion_params.txt", std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (ctx.dir / "ion_params.txt").string());
    for (const auto& line : ctx.comments) f << "# " << line << '\n';
    auto put = [&](const std::string& k, double v, const std::string& unit) {
        const std::string line = k + " = " + format_number(v) + (unit.empty() ? "" : " " + unit);
        f << line << '\n';
        log_of(ctx) << line << '\n';
    };
    put("omega_1/2pi", to_hz(n.modes.omega_1), "Hz");
    put("omega_2/2pi", to_hz(n.modes.omega_2), "Hz");
    put("eta_1", n.eta[0], "");
    put("eta_2", n.eta[1], "");
    put("lambda/2pi", to_hz(n.lambda), "Hz");
    put("omega_L/2pi", to_hz(n.omega_l), "Hz");
    if (n.rabi) {
        put("|omega_odf|/2pi (beams)", to_hz(std::abs(n.rabi->omega_odf)), "Hz");
        put("|omega_rw|/2pi (beams)", to_hz(std::abs(n.rabi->omega_rw)), "Hz");
        put("stark_up/2pi", to_hz(n.rabi->stark[0]), "Hz");
        put("stark_down/2pi", to_hz(n.rabi->stark[1]), "Hz");
    }
    if (n.scattering) put("gamma_eff/2pi", to_hz(n.scattering->gamma_eff), "Hz");
    f << "[regime]\n";
    for (const auto& item : report.items) {
        f << item.name << " = " << format_number(item.ratio) << " " << iontrap::to_string(item.verdict) << "  # " << item.rule
          << '\n';
    }
}

chainmap::ChainCoefficients build_chain(const ChainConfig& c) {
    const auto m = chainmap::discretize_measure(c.density, c.omega_max, c.n_nodes, c.discretization);
    return chainmap::chain_coefficients(m, c.n_chain);
}

void run(const ChainConfig& c, const OutputContext& ctx) {
    const auto chain = build_chain(c);
    Series s;
    std::vector<double> idx, w, t;
    for (std::size_t i = 0; i < chain.length(); ++i) {
        idx.push_back(static_cast<double>(i));
        w.push_back(to_hz(chain.omega[i]));
        t.push_back(to_hz(chain.hopping[i]));
    }
    s.add("n", std::move(idx));
    s.add("omega_n_hz", std::move(w));
    s.add("t_n_hz", std::move(t));
    emit_csv(s, ctx.dir / "chain.csv",
             with(ctx.comments, {"system_coupling_hz=" + format_number(to_hz(chain.system_coupling)),
                                 "t_n couples site n to site n+1"}));
    log_of(ctx) << "wrote " << (ctx.dir / "chain.csv").string() << '\n';
}

// Chain dimensions grow as 2·d^N, so the run has to be asked for explicitly.
class CapNotAcknowledged : public CapExceeded {
public:
    CapNotAcknowledged(std::size_t dim, std::size_t cap)
        : CapExceeded(dim, cap),
          msg_("chain-evolve builds a state of dimension " + std::to_string(dim) +
               "; rerun with --acknowledge-cap to proceed") {}
    const char* what() const noexcept override { return msg_.c_str(); }

private:
    std::string msg_;
};

void run(const ChainEvolveConfig& c, const OutputContext& ctx) {
    std::size_t dim = 2;
    for (std::size_t s = 0; s < c.evolution.n_sites && dim <= c.evolution.dimension_cap; ++s) dim *= c.evolution.d_max;
    if (dim > c.evolution.dimension_cap) throw CapExceeded(dim, c.evolution.dimension_cap);
    if (!ctx.acknowledge_cap) throw CapNotAcknowledged(dim, c.evolution.dimension_cap);

    const auto chain = build_chain(c.chain);
    const auto ev = chainmap::exact_chain_evolution(c.spin, chain, c.spin0, c.grid.times(), c.evolution);
    Series s;
    std::vector<double> tn, err(ev.times.size(), ev.max_norm_error);
    for (double t : ev.times) tn.push_back(c.spin.delta_rabi * t);
    s.add("t_s", ev.times);
    s.add("t_natural", std::move(tn));
    s.add("sigma_z", ev.sigma_z);
    emit_csv(s, ctx.dir / "chain_evolve.csv",
             with(ctx.comments, {"dimension=" + std::to_string(dim), "max_norm_error=" + format_number(ev.max_norm_error)}));
    log_of(ctx) << "wrote " << (ctx.dir / "chain_evolve.csv").string() << '\n';
}

}  // namespace

std::vector<double> TimeGrid::times() const { return lindblad::uniform_grid(t_end, steps); }

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"sd",         "sd-fit",     "corr",  "corr-dist",   "simulate",
                                                "nonmarkov",  "ion-params", "chain", "chain-evolve"};
    return names;
}

RunConfig parse_config(const std::string& subcommand, const json& document, ParseLog& log) {
    Node root(document, "", log);
    auto parse = [&]() -> RunConfig {
        if (subcommand == "sd") return parse_sd(root, log);
        if (subcommand == "sd-fit") return parse_sd_fit(root, log);
        if (subcommand == "corr") return parse_corr(root, log);
        if (subcommand == "corr-dist") return parse_corr_dist(root, log);
        if (subcommand == "simulate") return parse_simulate(root, log);
        if (subcommand == "nonmarkov") return parse_nonmarkov(root, log);
        if (subcommand == "ion-params") return parse_ion_params(root, log);
        if (subcommand == "chain") return parse_chain_block(root, log);
        if (subcommand == "chain-evolve") return parse_chain_evolve(root, log);
        throw ConfigError({"unknown subcommand '" + subcommand + "'"});
    };
    RunConfig config = parse();
    root.finish();
    log.throw_if_any();
    return config;
}

RunConfig parse_config(const std::string& subcommand, const json& document) {
    ParseLog log;
    return parse_config(subcommand, document, log);
}

std::vector<std::pair<std::string, iontrap::RegimeReport>> regime_reports(const RunConfig& config) {
    std::vector<std::pair<std::string, iontrap::RegimeReport>> out;
    auto modes = [&](const lindblad::SystemSpec& s) {
        for (std::size_t i = 0; i < s.modes.size(); ++i) {
            const auto& m = s.modes[i];
            if (!(m.omega_m > 0.0)) continue;
            out.emplace_back("modes." + std::to_string(i), iontrap::regime_check({m.omega_m, m.kappa, m.nbar}));
        }
    };
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, SimulateConfig> || std::is_same_v<T, NonmarkovConfig>) {
                modes(c.system);
            } else if constexpr (std::is_same_v<T, CorrConfig>) {
                const double nbar = correlation::hbar_beta_to_nbar(c.bath.hbar_beta, c.bath.omega_m);
                out.emplace_back("bath", iontrap::regime_check({c.bath.omega_m, c.bath.kappa, nbar}));
            } else if constexpr (std::is_same_v<T, SdConfig>) {
                for (std::size_t i = 0; i < c.density.components.size(); ++i) {
                    const auto& comp = c.density.components[i];
                    const double nbar = correlation::hbar_beta_to_nbar(c.hbar_beta, comp.omega_m);
                    out.emplace_back("components." + std::to_string(i), iontrap::regime_check({comp.omega_m, comp.kappa, nbar}));
                }
            } else if constexpr (std::is_same_v<T, IonParamsConfig>) {
                out.emplace_back("ion", ion_regime(c));
            }
        },
        config);
    return out;
}

void execute(const RunConfig& config, const OutputContext& ctx) {
    std::visit([&](const auto& c) { run(c, ctx); }, config);
}

}  // namespace sbsim::cli
