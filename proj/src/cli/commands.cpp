#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "cli_internal.hpp"
#include "cournot/cli.hpp"
#include "cournot/meansquare.hpp"
#include "cournot/phase_density.hpp"
#include "cournot/sde_sim.hpp"

namespace cournot::cli {

namespace {

// Agreement tolerances reported by the density and lyapunov commands.
constexpr double kDensityClosedDiscreteTol = 1e-3;
constexpr double kDensityMcTol = 0.05;
constexpr double kLambdaAbsTol = 1e-2;
constexpr double kLambdaSigmas = 3.0;
constexpr double kSweepSuccessFraction = 0.9;

Json mat_json(const Mat2& m) {
    return Json{{"m11", m.m11}, {"m12", m.m12}, {"m21", m.m21}, {"m22", m.m22}};
}

DensityOptions density_options(const RunConfig& c) {
    DensityOptions o;
    o.eps_q4 = c.eps_q4;
    o.residual_bound = c.residual_bound;
    return o;
}

MonteCarloSettings mc_settings(const RunConfig& c) {
    MonteCarloSettings mc;
    mc.seed = c.seed;
    mc.n_paths = c.n_paths;
    mc.horizon = c.T;
    mc.step_h = c.h;
    mc.bias_correction = c.mc_bias == "none" ? McBiasCorrection::None : McBiasCorrection::Richardson;
    mc.threads = c.threads;
    return mc;
}

struct Artifact {
    Json doc;                 // JSON-native commands
    std::optional<Table> table;  // tabular commands
    Json tolerances = Json::object();
    std::vector<std::pair<std::string, std::string>> sidecars;  // suffix, contents
    int exit_code = kExitOk;
};

Artifact cmd_analyze(const RunConfig& c) {
    Artifact a;
    const LinearSystem sys = linear_system(c);
    Json& d = a.doc;
    d["system"] = c.system;
    if (is_game(c)) {
        const GameParams p = game_params(c);
        const StationaryState x0 = stationary_state(p);
        const Vec2 g = gamma_offsets(p);
        const Linearization lin = linearize(p, noise_wiring(c));
        d["stationary_state"] = Json{{"x10", x0.x10}, {"x20", x0.x20}};
        d["gamma"] = Json::array({g[0], g[1]});
        d["jacobian_deviation"] = lin.jacobian_deviation;
        d["jacobian_verified"] = lin.jacobian_verified;
    }
    d["A"] = mat_json(sys.a);
    d["B"] = mat_json(sys.b);
    d["wiring"] = to_string(sys.wiring);
    const CharacteristicRoots roots = characteristic_roots(sys);
    d["trace"] = sys.a.trace();
    d["det"] = sys.a.det();
    d["half_trace"] = roots.half_trace;
    d["discriminant"] = roots.discriminant;
    d["eigenvalues"] = Json::array({Json{{"re", roots.mu1.real()}, {"im", roots.mu1.imag()}},
                                    Json{{"re", roots.mu2.real()}, {"im", roots.mu2.imag()}}});

    std::optional<SecondMomentSettings> ms;
    if (c.ms_mc) {
        ms = SecondMomentSettings{c.seed, c.ms_paths, c.ms_T, c.h, 10, c.threads};
    }
    const MeanSquareReport r = mean_square_report(sys, ms);
    Json m = Json::object();
    if (r.paper_conditions) {
        const auto& pc = *r.paper_conditions;
        m["paper_conditions"] = Json{{"A1", pc.A1}, {"q1", pc.q1}, {"q2", pc.q2}, {"passes", pc.passes}};
    } else {
        m["paper_conditions"] = nullptr;
        m["paper_conditions_note"] = "a12 + b11 b12 vanishes";
    }
    if (r.certificate) {
        const auto& ct = *r.certificate;
        m["certificate"] = Json{{"w_ratio", ct.w_ratio},
                                {"c11", ct.form.c11},
                                {"c12", ct.form.c12},
                                {"c22", ct.form.c22},
                                {"margin", ct.margin}};
    } else {
        m["certificate"] = nullptr;
    }
    if (r.mc_check) {
        m["mc_check"] = Json{{"decay_observed", r.mc_check->decay_observed},
                             {"fit_rate", r.mc_check->fit_rate},
                             {"fit_std_error", r.mc_check->fit_std_error}};
    }
    m["verdict"] = to_string(r.verdict);
    d["mean_square"] = m;

    a.tolerances = Json{{"jacobian", kJacobianTolerance},
                        {"state_epsilon", kStateEpsilon},
                        {"paper_conditions_division", 1e-12},
                        {"mc_decay_sigmas", 3.0}};
    return a;
}

Artifact cmd_density(const RunConfig& c) {
    Artifact a;
    const LinearSystem sys = linear_system(c);
    const DensityOptions opts = density_options(c);
    const PhaseDensity closed = density_closed_form(sys, c.n_grid, opts);
    const PhaseDensity discrete = density_backward_difference(sys, c.N, opts);
    std::optional<PhaseDensity> hist;
    if (c.density_mc) {
        HistogramSettings hs;
        hs.seed = c.seed;
        hs.n_samples = c.hist_samples;
        hs.burn_in_time = c.hist_burn_in;
        hs.step_h = c.hist_h;
        hs.n_bins = c.hist_bins;
        hist = mc_angle_histogram(sys, hs);
    }
    const std::vector<double> residual = fpe_residual_profile(sys, closed);

    Table t;
    t.header = {"theta", "p_closed", "p_discrete", "p_mc", "fpe_residual"};
    double diff_discrete = 0.0, diff_mc = 0.0;
    for (std::size_t i = 0; i < closed.intervals(); ++i) {
        const double th = closed.theta[i];
        const double pc = closed.values[i];
        const double pd = discrete.value_at(th);
        diff_discrete = std::max(diff_discrete, std::abs(pc - pd));
        std::string pm = "";
        if (hist) {
            const double v = hist->value_at(th);
            diff_mc = std::max(diff_mc, std::abs(pc - v));
            pm = fmt(v);
        }
        t.rows.push_back({fmt(th), fmt(pc), fmt(pd), pm, fmt(residual[i])});
    }
    t.meta = {
        {"closed_variant", to_string(closed.variant)},
        {"discrete_variant", to_string(discrete.variant)},
        {"discrete_periodicity_fallback", discrete.periodicity_fallback ? "true" : "false"},
        {"closed_normalization_error", fmt(closed.normalization_error)},
        {"closed_fpe_residual", fmt(closed.fpe_residual)},
        {"discrete_fpe_residual", fmt(discrete.fpe_residual)},
        {"max_abs_diff_closed_discrete", fmt(diff_discrete)},
        {"agree_closed_discrete", diff_discrete <= kDensityClosedDiscreteTol ? "true" : "false"},
    };
    if (hist) {
        t.meta.emplace_back("max_abs_diff_closed_mc", fmt(diff_mc));
        t.meta.emplace_back("agree_closed_mc", diff_mc <= kDensityMcTol ? "true" : "false");
    }
    a.table = std::move(t);
    a.tolerances = Json{{"closed_vs_discrete", kDensityClosedDiscreteTol},
                        {"closed_vs_mc", kDensityMcTol},
                        {"fpe_residual_bound", c.residual_bound},
                        {"eps_q4", c.eps_q4}};
    return a;
}

std::vector<LyapunovMethod> parse_methods(const std::string& spec) {
    if (spec == "all") {
        return {LyapunovMethod::Quadrature, LyapunovMethod::DiscreteScheme, LyapunovMethod::MonteCarlo};
    }
    std::vector<LyapunovMethod> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "quadrature") out.push_back(LyapunovMethod::Quadrature);
        else if (item == "discrete") out.push_back(LyapunovMethod::DiscreteScheme);
        else if (item == "mc") out.push_back(LyapunovMethod::MonteCarlo);
        else throw InvalidParams("methods: unknown method '" + item + "'");
    }
    if (out.empty()) throw InvalidParams("methods: empty list");
    return out;
}

Artifact cmd_lyapunov(const RunConfig& c) {
    Artifact a;
    const LinearSystem sys = linear_system(c);
    const DensityOptions opts = density_options(c);
    std::vector<LyapunovEstimate> est;
    for (LyapunovMethod m : parse_methods(c.methods)) {
        switch (m) {
            case LyapunovMethod::Quadrature: est.push_back(lambda_quadrature(sys, c.n_grid, opts)); break;
            case LyapunovMethod::DiscreteScheme: est.push_back(lambda_discrete(sys, c.N, opts)); break;
            case LyapunovMethod::MonteCarlo: est.push_back(lambda_monte_carlo(sys, mc_settings(c))); break;
        }
    }
    Json estimates = Json::object();
    for (const auto& e : est) {
        Json j{{"value", e.value}, {"std_error", e.std_error}, {"n_used", e.n_used}};
        if (!e.density_variant.empty()) j["density_variant"] = e.density_variant;
        Json diag = Json::object();
        for (const auto& [k, v] : e.diagnostics) diag[k] = v;
        j["diagnostics"] = diag;
        estimates[to_string(e.method)] = j;
    }
    Json agreement = Json::array();
    bool all = true;
    for (std::size_t i = 0; i < est.size(); ++i) {
        for (std::size_t j = i + 1; j < est.size(); ++j) {
            const double diff = std::abs(est[i].value - est[j].value);
            const double tol =
                std::max(kLambdaAbsTol, kLambdaSigmas * std::max(est[i].std_error, est[j].std_error));
            const bool ok = diff <= tol;
            all = all && ok;
            agreement.push_back(Json{{"first", to_string(est[i].method)},
                                     {"second", to_string(est[j].method)},
                                     {"abs_diff", diff},
                                     {"tolerance", tol},
                                     {"agree", ok}});
        }
    }
    a.doc["estimates"] = estimates;
    a.doc["agreement"] = agreement;
    a.doc["all_agree"] = all;
    a.tolerances = Json{{"agreement_abs", kLambdaAbsTol},
                        {"agreement_sigmas", kLambdaSigmas},
                        {"fpe_residual_bound", c.residual_bound},
                        {"eps_q4", c.eps_q4}};
    return a;
}

Artifact cmd_sweep(const RunConfig& c) {
    Artifact a;
    if (!is_game(c)) throw InvalidParams("sweep runs on the game system only (system = game)");
    if (c.noise != "rotation_scale") throw InvalidParams("sweep needs noise = rotation_scale");
    if (c.wiring != "shared") throw InvalidParams("sweep needs wiring = shared");
    const GameParams base = game_params(c);

    SweepSettings s;
    s.vary = c.vary == "alpha" ? SweepParameter::Alpha : SweepParameter::Beta;
    s.lo = c.lo;
    s.hi = c.hi;
    s.n_points = c.n_points;
    s.method = c.sweep_method == "quadrature" ? LyapunovMethod::Quadrature
             : c.sweep_method == "discrete"   ? LyapunovMethod::DiscreteScheme
                                              : LyapunovMethod::MonteCarlo;
    s.n_grid = c.n_grid;
    s.N = c.N;
    s.mc = mc_settings(c);
    s.density = density_options(c);
    s.bracket_width = c.bracket_width;
    s.uncorrected_density = c.uncorrected_density;
    s.threads = c.threads;
    const SweepResult r = lambda_sweep(base, s);

    Table t;
    t.header = {"parameter", "lambda", "std_error", "formula_gap", "status", "sign_change_next"};
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const SweepPoint& pt = r.points[i];
        bool change_next = false;
        for (const auto& sc : r.sign_changes) {
            change_next = change_next || (sc.lo >= pt.parameter && i + 1 < r.points.size() &&
                                          sc.hi <= r.points[i + 1].parameter);
        }
        t.rows.push_back({fmt(pt.parameter), pt.lambda ? fmt(*pt.lambda) : "",
                          pt.lambda ? fmt(pt.std_error) : "", pt.formula_gap ? fmt(*pt.formula_gap) : "",
                          pt.lambda ? "ok" : "skipped: " + pt.skip_reason, change_next ? "true" : "false"});
    }
    t.meta = {{"vary", c.vary},
              {"n_points", std::to_string(r.points.size())},
              {"n_skipped", std::to_string(r.n_skipped)},
              {"n_sign_changes", std::to_string(r.sign_changes.size())}};
    Json changes = Json::array();
    for (std::size_t i = 0; i < r.sign_changes.size(); ++i) {
        const SignChange& sc = r.sign_changes[i];
        t.meta.emplace_back("sign_change." + std::to_string(i),
                            fmt(sc.root) + " in [" + fmt(sc.lo) + ", " + fmt(sc.hi) + "]");
        changes.push_back(Json{{"lo", sc.lo},
                               {"hi", sc.hi},
                               {"root", sc.root},
                               {"lambda_lo", sc.lambda_lo},
                               {"lambda_hi", sc.lambda_hi},
                               {"converged", sc.converged}});
    }
    a.tolerances = Json{{"bracket_width", c.bracket_width},
                        {"success_fraction", kSweepSuccessFraction},
                        {"fpe_residual_bound", c.residual_bound}};
    Json side = Json::object();
    side["parameter"] = c.vary;
    side["sign_changes"] = changes;
    side["config"] = config_json(c);
    a.sidecars.emplace_back(".sign_changes.json", side.dump(2) + "\n");

    const double ok = static_cast<double>(r.points.size() - r.n_skipped) / static_cast<double>(r.points.size());
    a.exit_code = ok >= kSweepSuccessFraction ? kExitOk : kExitNumerical;
    a.table = std::move(t);
    return a;
}

Artifact cmd_simulate(const RunConfig& c) {
    Artifact a;
    if (!is_game(c)) throw InvalidParams("simulate runs on the game system only (system = game)");
    const GameParams p = game_params(c);
    p.validate();
    if (!(c.h > 0.0) || !(c.T > 0.0)) throw InvalidParams("T and h must be positive");
    const Scheme scheme = c.scheme == "euler_maruyama" ? Scheme::EulerMaruyama : Scheme::PaperTaylor2;
    const TaylorBracket bracket = c.bracket == "exact" ? TaylorBracket::Exact : TaylorBracket::AsTabulated;

    WienerSpec spec;
    spec.seed = c.seed;
    spec.step_h = c.h;
    spec.n_steps = static_cast<std::size_t>(std::llround(c.T / c.h));
    spec.wiring = noise_wiring(c);
    const Vec2 x_init{c.x1_init, c.x2_init};
    const WienerIncrements inc = wiener_increments(spec, 0);
    const SdePath path = integrate_path(p, x_init, c.h, inc, scheme, bracket);
    std::optional<SdePath> ode;
    if (c.ode) {
        GameParams q = p;
        q.b = Mat2::zero();
        ode = integrate_path(q, x_init, c.h, inc, scheme, bracket);
    }

    Table t;
    t.header = {"n", "t", "x1", "x2"};
    if (ode) {
        t.header.push_back("x1_ode");
        t.header.push_back("x2_ode");
    }
    t.header.push_back("flag");
    for (std::size_t n = 0; n < path.states.size(); n += c.record_every) {
        std::vector<std::string> row{std::to_string(n), fmt(path.times[n]), fmt(path.states[n][0]),
                                     fmt(path.states[n][1])};
        if (ode) {
            const bool have = n < ode->states.size();
            row.push_back(have ? fmt(ode->states[n][0]) : "");
            row.push_back(have ? fmt(ode->states[n][1]) : "");
        }
        row.push_back("ok");
        t.rows.push_back(std::move(row));
    }
    if (path.truncation) {
        const std::size_t n = path.truncation->step + 1;
        std::vector<std::string> row{std::to_string(n), fmt(static_cast<double>(n) * c.h), "", ""};
        if (ode) {
            row.push_back("");
            row.push_back("");
        }
        row.push_back("truncated:" + path.truncation->reason);
        t.rows.push_back(std::move(row));
    }
    t.meta = {{"seed", std::to_string(c.seed)},
              {"scheme", to_string(scheme)},
              {"n_steps", std::to_string(spec.n_steps)},
              {"truncated", path.truncation ? "true" : "false"}};
    if (ode && ode->truncation) t.meta.emplace_back("ode_truncated", "true");
    a.tolerances = Json{{"state_epsilon", kStateEpsilon}};
    a.table = std::move(t);
    return a;
}

void emit(const RunConfig& c, const Artifact& a, std::ostream& os) {
    OutputFormat f = output_format(c);
    if (a.table) {
        if (f == OutputFormat::Json) write_table_json(os, *a.table, c, a.tolerances);
        else write_csv(os, *a.table, c, a.tolerances);
        return;
    }
    Json doc = a.doc;
    doc["tolerances"] = a.tolerances;
    doc["config"] = config_json(c);
    if (f == OutputFormat::Csv) write_flat_csv(os, doc);
    else os << doc.dump(2) << '\n';
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidParams("cannot open output file '" + path + "'");
    f << contents;
    if (!f) throw InvalidParams("failed writing output file '" + path + "'");
}

int dispatch(RunConfig& c, std::ostream& out) {
    static const std::map<std::string, std::function<Artifact(const RunConfig&)>> commands = {
        {"analyze", cmd_analyze}, {"density", cmd_density},   {"lyapunov", cmd_lyapunov},
        {"sweep", cmd_sweep},     {"simulate", cmd_simulate},
    };
    const Artifact a = commands.at(c.command)(c);
    std::ostringstream body;
    emit(c, a, body);
    if (c.output.empty()) {
        out << body.str();
    } else {
        write_file(c.output, body.str());
        for (const auto& [suffix, contents] : a.sidecars) write_file(c.output + suffix, contents);
    }
    return a.exit_code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Stochastic stability analysis of the Cournot duopoly and 2-D linear SDEs", "cournot"};
    RunConfig cfg;
    register_options(app, cfg);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            out << app.help();
            return kExitOk;
        }
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        check_choices(cfg);
        resolve(cfg);
        return dispatch(cfg, out);
    } catch (const Error& e) {
        err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return e.is_usage_error() ? kExitUsage : kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace cournot::cli
