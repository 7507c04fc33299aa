#include <algorithm>
#include <cstdio>
#include <string>

#include "cli_internal.hpp"

namespace cournot::cli {

void register_options(CLI::App& app, RunConfig& c) {
    app.set_help_flag("--help", "print this help and exit");
    app.add_option("command", c.command, "analyze | density | lyapunov | sweep | simulate")
        ->required()
        ->check(CLI::IsMember({"analyze", "density", "lyapunov", "sweep", "simulate"}));
    app.set_config("--config", "", "key=value settings file; flags take precedence");

    app.add_option("--system", c.system, "game | linear");
    app.add_option("--c1", c.c1);
    app.add_option("--c2", c.c2);
    app.add_option("--k1", c.k1);
    app.add_option("--k2", c.k2);
    app.add_option("--a11", c.a11, "linear system drift matrix");
    app.add_option("--a12", c.a12);
    app.add_option("--a21", c.a21);
    app.add_option("--a22", c.a22);
    app.add_option("--noise", c.noise, "rotation_scale | general");
    app.add_option("--alpha", c.alpha, "b = alpha I + beta J");
    app.add_option("--beta", c.beta);
    app.add_option("--b11", c.b11, "general noise matrix");
    app.add_option("--b12", c.b12);
    app.add_option("--b21", c.b21);
    app.add_option("--b22", c.b22);
    app.add_option("--wiring", c.wiring, "shared | independent");

    app.add_option("--n_grid", c.n_grid, "closed-form density intervals");
    app.add_option("--N", c.N, "backward-difference intervals on [0, pi]");
    app.add_option("--n_paths", c.n_paths, "Monte Carlo paths");
    app.add_option("--T", c.T, "time horizon");
    app.add_option("--h", c.h, "time step");
    app.add_option("--seed", c.seed);
    app.add_option("--eps_q4", c.eps_q4);
    app.add_option("--residual_bound", c.residual_bound);
    app.add_option("--mc_bias", c.mc_bias, "Monte Carlo step-bias correction: richardson | none");

    app.add_option("--methods", c.methods, "all or a comma list of quadrature, discrete, mc");

    app.add_option("--density_mc", c.density_mc, "include the Monte Carlo histogram column");
    app.add_option("--hist_samples", c.hist_samples);
    app.add_option("--hist_bins", c.hist_bins);
    app.add_option("--hist_h", c.hist_h);
    app.add_option("--hist_burn_in", c.hist_burn_in);

    app.add_option("--vary", c.vary, "alpha | beta");
    app.add_option("--lo", c.lo);
    app.add_option("--hi", c.hi);
    app.add_option("--n_points", c.n_points);
    app.add_option("--sweep_method", c.sweep_method, "quadrature | discrete | mc");
    app.add_option("--bracket_width", c.bracket_width);
    app.add_option("--uncorrected_density", c.uncorrected_density);

    app.add_option("--scheme", c.scheme, "paper_taylor2 | euler_maruyama");
    app.add_option("--bracket", c.bracket, "exact | as_tabulated");
    app.add_option("--x1_init", c.x1_init);
    app.add_option("--x2_init", c.x2_init);
    app.add_option("--ode", c.ode, "add the b = 0 deterministic path");
    app.add_option("--record_every", c.record_every);

    app.add_option("--ms_mc", c.ms_mc, "run the second-moment Monte Carlo check");
    app.add_option("--ms_paths", c.ms_paths);
    app.add_option("--ms_T", c.ms_T);

    app.add_option("-o,--output", c.output, "output file (default stdout)");
    app.add_option("--format", c.format, "auto | csv | json");
    app.add_option("--threads", c.threads, "worker cap (0: environment or hardware)");
}

namespace {

void require_member(const std::string& key, const std::string& value,
                    std::initializer_list<const char*> allowed) {
    for (const char* a : allowed) {
        if (value == a) return;
    }
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    throw InvalidParams(key + " = '" + value + "' (expected one of " + list + ")");
}

std::string fmt_size(std::size_t v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "true" : "false"; }

}  // namespace

void check_choices(const RunConfig& c) {
    require_member("system", c.system, {"game", "linear"});
    require_member("noise", c.noise, {"rotation_scale", "general"});
    require_member("wiring", c.wiring, {"shared", "independent"});
    require_member("vary", c.vary, {"alpha", "beta"});
    require_member("sweep_method", c.sweep_method, {"quadrature", "discrete", "mc"});
    require_member("scheme", c.scheme, {"paper_taylor2", "euler_maruyama"});
    require_member("bracket", c.bracket, {"exact", "as_tabulated"});
    require_member("mc_bias", c.mc_bias, {"richardson", "none"});
    require_member("format", c.format, {"auto", "csv", "json"});
    if (c.record_every == 0) throw InvalidParams("record_every must be positive");
}

void resolve(RunConfig& c) {
    if (c.command == "simulate" && is_game(c) && (c.x1_init < 0.0 || c.x2_init < 0.0)) {
        const GameParams p = game_params(c);
        p.validate();
        const StationaryState x0 = stationary_state(p);
        if (c.x1_init < 0.0) c.x1_init = kDefaultInitScale * x0.x10;
        if (c.x2_init < 0.0) c.x2_init = kDefaultInitScale * x0.x20;
    }
}

std::vector<std::pair<std::string, std::string>> echo(const RunConfig& c) {
    return {
        {"system", c.system},
        {"c1", fmt(c.c1)},
        {"c2", fmt(c.c2)},
        {"k1", fmt(c.k1)},
        {"k2", fmt(c.k2)},
        {"a11", fmt(c.a11)},
        {"a12", fmt(c.a12)},
        {"a21", fmt(c.a21)},
        {"a22", fmt(c.a22)},
        {"noise", c.noise},
        {"alpha", fmt(c.alpha)},
        {"beta", fmt(c.beta)},
        {"b11", fmt(c.b11)},
        {"b12", fmt(c.b12)},
        {"b21", fmt(c.b21)},
        {"b22", fmt(c.b22)},
        {"wiring", c.wiring},
        {"n_grid", fmt_size(c.n_grid)},
        {"N", fmt_size(c.N)},
        {"n_paths", fmt_size(c.n_paths)},
        {"T", fmt(c.T)},
        {"h", fmt(c.h)},
        {"seed", std::to_string(c.seed)},
        {"eps_q4", fmt(c.eps_q4)},
        {"residual_bound", fmt(c.residual_bound)},
        {"mc_bias", c.mc_bias},
        {"methods", c.methods},
        {"density_mc", fmt_bool(c.density_mc)},
        {"hist_samples", fmt_size(c.hist_samples)},
        {"hist_bins", fmt_size(c.hist_bins)},
        {"hist_h", fmt(c.hist_h)},
        {"hist_burn_in", fmt(c.hist_burn_in)},
        {"vary", c.vary},
        {"lo", fmt(c.lo)},
        {"hi", fmt(c.hi)},
        {"n_points", fmt_size(c.n_points)},
        {"sweep_method", c.sweep_method},
        {"bracket_width", fmt(c.bracket_width)},
        {"uncorrected_density", fmt_bool(c.uncorrected_density)},
        {"scheme", c.scheme},
        {"bracket", c.bracket},
        {"x1_init", fmt(c.x1_init)},
        {"x2_init", fmt(c.x2_init)},
        {"ode", fmt_bool(c.ode)},
        {"record_every", fmt_size(c.record_every)},
        {"ms_mc", fmt_bool(c.ms_mc)},
        {"ms_paths", fmt_size(c.ms_paths)},
        {"ms_T", fmt(c.ms_T)},
    };
}

bool is_game(const RunConfig& c) { return c.system == "game"; }

GameParams game_params(const RunConfig& c) {
    if (c.noise == "rotation_scale") return GameParams::rotation_scale(c.c1, c.c2, c.k1, c.k2, c.alpha, c.beta);
    GameParams p{c.c1, c.c2, c.k1, c.k2, Mat2{c.b11, c.b12, c.b21, c.b22}};
    return p;
}

NoiseWiring noise_wiring(const RunConfig& c) {
    return c.wiring == "shared" ? NoiseWiring::SharedWiener : NoiseWiring::IndependentWieners;
}

LinearSystem linear_system(const RunConfig& c) {
    if (is_game(c)) {
        const GameParams p = game_params(c);
        p.validate();
        return linearize(p, noise_wiring(c)).system;
    }
    const Mat2 a{c.a11, c.a12, c.a21, c.a22};
    if (!a.is_finite()) throw InvalidParams("linear system matrix A has non-finite entries");
    LinearSystem sys = c.noise == "rotation_scale" ? rotation_scale_system(a, c.alpha, c.beta)
                                                   : LinearSystem{a, Mat2{c.b11, c.b12, c.b21, c.b22},
                                                                  NoiseWiring::SharedWiener};
    if (!sys.b.is_finite()) throw InvalidParams("noise matrix B has non-finite entries");
    sys.wiring = noise_wiring(c);
    return sys;
}

OutputFormat output_format(const RunConfig& c) {
    if (c.format == "csv") return OutputFormat::Csv;
    if (c.format == "json") return OutputFormat::Json;
    return OutputFormat::Auto;
}

Json config_json(const RunConfig& c) {
    Json j = Json::object();
    j["command"] = c.command;
    for (const auto& [k, v] : echo(c)) j[k] = v;
    return j;
}

}  // namespace cournot::cli
