#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cournot/core_model.hpp"
#include "cournot/lyapunov.hpp"

namespace cournot::cli {

using Json = nlohmann::ordered_json;

/// Unset initial states start at this multiple of the stationary state.
inline constexpr double kDefaultInitScale = 1.05;

enum class OutputFormat { Auto, Csv, Json };

/// Fully resolved settings of one invocation. Defaults give the
/// reference game c = (0.2, 2), k = (0.2, 0.4) at alpha = beta = 2.
struct RunConfig {
    std::string command;

    // system
    std::string system = "game";  // game | linear
    double c1 = 0.2, c2 = 2.0, k1 = 0.2, k2 = 0.4;
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
    std::string noise = "rotation_scale";  // rotation_scale | general
    double alpha = 2.0, beta = 2.0;
    double b11 = 0.0, b12 = 0.0, b21 = 0.0, b22 = 0.0;
    std::string wiring = "shared";  // shared | independent

    // numerics
    std::size_t n_grid = 2048;
    std::size_t N = 2000;
    std::size_t n_paths = 200;
    double T = 200.0;
    double h = 1e-3;
    std::uint64_t seed = 1;
    double eps_q4 = 1e-8;
    double residual_bound = 1e-4;
    std::string mc_bias = "richardson";  // richardson | none

    // lyapunov
    std::string methods = "all";

    // density
    bool density_mc = true;
    std::size_t hist_samples = 1'000'000;
    std::size_t hist_bins = 64;
    double hist_h = 1e-2;
    double hist_burn_in = 50.0;

    // sweep
    std::string vary = "alpha";
    double lo = -3.0, hi = 3.0;
    std::size_t n_points = 61;
    std::string sweep_method = "quadrature";
    double bracket_width = 1e-3;
    bool uncorrected_density = false;

    // simulate
    std::string scheme = "paper_taylor2";
    std::string bracket = "exact";
    double x1_init = -1.0, x2_init = -1.0;  // negative: kDefaultInitScale * x0
    bool ode = false;
    std::size_t record_every = 1;

    // analyze
    bool ms_mc = false;
    std::size_t ms_paths = 500;
    double ms_T = 20.0;

    // execution (not echoed: never changes results)
    std::string output;
    std::string format = "auto";
    unsigned threads = 0;
};

/// Registers every option on `app`; values land in `cfg`.
void register_options(CLI::App& app, RunConfig& cfg);

/// Checks enumerated string settings; throws InvalidParams.
void check_choices(const RunConfig& cfg);

/// Resolves defaults that depend on other settings (the initial state).
void resolve(RunConfig& cfg);

/// Ordered key/value echo of every result-affecting setting.
std::vector<std::pair<std::string, std::string>> echo(const RunConfig& cfg);

bool is_game(const RunConfig& cfg);
GameParams game_params(const RunConfig& cfg);
LinearSystem linear_system(const RunConfig& cfg);
NoiseWiring noise_wiring(const RunConfig& cfg);
OutputFormat output_format(const RunConfig& cfg);

// Output helpers.

/// 17 significant digits, "nan"/"inf"/"-inf" for non-finite values.
std::string fmt(double v);
std::string csv_escape(const std::string& field);

/// Column-oriented table with '#' metadata lines.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::pair<std::string, std::string>> meta;
};

void write_csv(std::ostream& os, const Table& t, const RunConfig& cfg, const Json& tolerances);
void write_table_json(std::ostream& os, const Table& t, const RunConfig& cfg, const Json& tolerances);

/// CSV fallback for JSON documents: one "key,value" row per leaf.
void write_flat_csv(std::ostream& os, const Json& doc);

Json config_json(const RunConfig& cfg);

}  // namespace cournot::cli
