#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hogl/basis.hpp"
#include "hogl/errors.hpp"
#include "hogl/io.hpp"
#include "hogl/parallel.hpp"
#include "hogl/prox.hpp"
#include "hogl/rng.hpp"
#include "hogl/simulation.hpp"
#include "hogl/solver.hpp"
#include "hogl/tuning.hpp"

using json = nlohmann::json;
using hogl::Matrix;
using hogl::Route;
using hogl::Vector;

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

int thread_count_from(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("HOGL_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    return hogl::default_thread_count();
}

// Optional JSON configuration file: values act as defaults, explicit flags
// win. Implemented by injecting the file's settings as arguments ahead of
// the user's (options take the last occurrence).
void expand_config_args(std::vector<std::string>& args) {
    std::string path;
    std::size_t at = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            at = i;
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            at = i;
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return;

    std::ifstream in(path);
    if (!in) throw hogl::Error("cannot open config file: " + path);
    json config;
    in >> config;
    if (!config.is_object()) throw hogl::Error("config file must hold a JSON object: " + path);

    std::vector<std::string> injected;
    for (const auto& [key, value] : config.items()) {
        if (value.is_boolean()) {
            if (value.get<bool>()) injected.push_back("--" + key);
        } else if (value.is_string()) {
            injected.push_back("--" + key);
            injected.push_back(value.get<std::string>());
        } else if (value.is_number_integer()) {
            injected.push_back("--" + key);
            injected.push_back(std::to_string(value.get<long long>()));
        } else if (value.is_number()) {
            injected.push_back("--" + key);
            injected.push_back(hogl::format_double(value.get<double>()));
        } else {
            throw hogl::Error("config key '" + key + "' has an unsupported type");
        }
    }
    // insert after the subcommand token so the values bind to it
    (void)at;
    std::size_t anchor = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].empty() && args[i][0] != '-') {
            anchor = i + 1;
            break;
        }
    }
    args.insert(args.begin() + anchor, injected.begin(), injected.end());
}

double parse_egcv_exponent(const std::string& text, int n, int p) {
    if (text == "log-np") return hogl::egcv_alpha_log_np(n, p);
    if (text == "sqrt-np") return hogl::egcv_alpha_sqrt_np(n, p);
    try {
        return std::stod(text);
    } catch (...) {
        throw hogl::Error("--egcv-exponent must be log-np, sqrt-np, or a number");
    }
}

Route parse_route(const std::string& text) {
    if (text == "hogl1" || text == "mm") return Route::mm;
    if (text == "hogl2" || text == "bcd") return Route::bcd;
    throw hogl::Error("--route must be hogl1 or hogl2");
}

json coefficients_json(const hogl::Coefficients& coefs) {
    auto matrix_rows = [](const Matrix& m) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    json out;
    out["route"] = coefs.route == Route::mm ? "hogl1" : "hogl2";
    out["theta"] = matrix_rows(coefs.theta);
    if (coefs.has_xi) out["xi"] = matrix_rows(coefs.xi);
    return out;
}

json model_json(const hogl::SelectedModel& model) {
    json out;
    out["selected_variables"] = json::array();
    for (int v : model.variables) out["selected_variables"].push_back(v + 1);  // 1-based
    out["degrees"] = json::array();
    for (int d : model.degrees) out["degrees"].push_back(d);
    return out;
}

struct BasisInputs {
    Matrix x;
    hogl::BasisSpec spec;
};

BasisInputs build_basis(const std::string& kind, int p, int q) {
    BasisInputs out;
    const auto grid = hogl::uniform_time_points(p);
    if (kind == "polynomial") {
        out.x = hogl::polynomial_basis(grid, q);
        out.spec = hogl::polynomial_spec(q);
    } else if (kind == "fourier") {
        auto [x, spec] = hogl::fourier_basis(grid, q);
        out.x = std::move(x);
        out.spec = std::move(spec);
    } else {
        throw hogl::Error("--basis must be polynomial or fourier");
    }
    return out;
}

struct FitArgs {
    std::string y_path, a_path;
    std::string basis = "polynomial";
    int q = 6;
    std::string route = "hogl2";
    double delta = 1.0;
    double lambda = -1.0;  // required for fit
    std::string weights = "adaptive";
    double tol = 1e-6;
    int max_iter = 10000;
    std::string egcv_exponent = "log-np";
    std::string out_json = "fit_result.json";
    std::string theta_csv = "theta_hat.csv";
};

void add_fit_inputs(CLI::App* cmd, FitArgs& args) {
    cmd->add_option("--Y", args.y_path, "CSV of responses, one row per individual")->required();
    cmd->add_option("--A", args.a_path, "CSV of explanatory variables, one row per individual")
        ->required();
    cmd->add_option("--basis", args.basis, "polynomial or fourier");
    cmd->add_option("--q", args.q, "number of penalty levels");
    cmd->add_option("--route", args.route, "hogl1 (MM on V) or hogl2 (BCD on H)");
    cmd->add_option("--weights", args.weights, "adaptive or ones");
    cmd->add_option("--tol", args.tol, "relative sup-norm convergence tolerance");
    cmd->add_option("--max-iter", args.max_iter, "iteration cap");
    cmd->add_option("--egcv-exponent", args.egcv_exponent, "log-np, sqrt-np, or a number");
}

struct LoadedProblem {
    hogl::GmanovaProblem prob;
    Route route;
    Matrix weights;
};

// File reading, shape checks, and flag validation; failures here are input
// errors (exit 2). Numerical construction happens in build_loaded_problem.
struct LoadedInputs {
    Matrix y, a;
    BasisInputs basis;
    Route route;
    std::string weights_kind;
};

LoadedInputs load_inputs(const FitArgs& args) {
    LoadedInputs out;
    try {
        out.y = hogl::read_csv_matrix(args.y_path);
    } catch (const std::exception& e) {
        throw hogl::Error(std::string("--Y: ") + e.what());
    }
    try {
        out.a = hogl::read_csv_matrix(args.a_path);
    } catch (const std::exception& e) {
        throw hogl::Error(std::string("--A: ") + e.what());
    }
    if (out.y.rows() != out.a.rows()) {
        throw hogl::Error("--Y and --A must have the same number of rows (individuals)");
    }
    if (args.q < 1 || args.q > out.y.cols()) {
        throw hogl::Error("--q must lie in [1, number of Y columns]");
    }
    out.basis = build_basis(args.basis, static_cast<int>(out.y.cols()), args.q);
    out.route = parse_route(args.route);
    if (args.weights != "adaptive" && args.weights != "ones") {
        throw hogl::Error("--weights must be adaptive or ones");
    }
    out.weights_kind = args.weights;
    return out;
}

LoadedProblem build_loaded_problem(const LoadedInputs& inputs) {
    LoadedProblem out{hogl::build_problem(inputs.y, inputs.a, inputs.basis.x, inputs.basis.spec),
                      inputs.route,
                      {}};
    if (inputs.weights_kind == "adaptive") {
        out.weights = hogl::adaptive_weights(out.prob, out.route);
    } else {
        out.weights = Matrix::Constant(out.prob.k, out.prob.basis.levels, 1.0);
    }
    return out;
}

int cmd_fit(const FitArgs& args) {
    LoadedInputs inputs = [&] {
        try {
            return load_inputs(args);
        } catch (const std::exception& e) {
            std::cerr << "input error: " << e.what() << "\n";
            std::exit(kExitInput);
        }
    }();
    LoadedProblem loaded = build_loaded_problem(inputs);
    const auto& prob = loaded.prob;

    hogl::PenaltySpec spec{args.delta, args.lambda, loaded.weights};
    hogl::FitOptions opts;
    opts.tol = args.tol;
    opts.max_iter = args.max_iter;
    const Matrix init = Matrix::Zero(prob.k, prob.m);
    const auto fit = loaded.route == Route::mm ? hogl::fit_mm(prob, spec, init, opts)
                                               : hogl::fit_bcd(prob, spec, init, opts);

    const long df = hogl::count_df(fit.coefs);
    const auto model = hogl::selected_model(fit.coefs, prob.basis);
    const double alpha = parse_egcv_exponent(args.egcv_exponent, prob.n, prob.p);
    const Matrix y_hat = hogl::fitted_values(prob, fit.coefs);
    const double egcv_value = hogl::egcv(prob.Y, y_hat, prob.S, df, alpha);
    const double lmax = hogl::lambda_max(prob, args.delta, loaded.weights, loaded.route);

    json out;
    out["delta"] = args.delta;
    out["lambda"] = args.lambda;
    out["lambda_max"] = lmax;
    out["df"] = df;
    out["egcv"] = egcv_value;
    out["converged"] = fit.info.converged;
    out["iterations"] = fit.info.iterations;
    out["mu_hat"] = std::vector<double>(prob.mu_hat.data(), prob.mu_hat.data() + prob.p);
    out.update(model_json(model));
    out.update(coefficients_json(fit.coefs));
    hogl::write_text_atomic(args.out_json, out.dump(2) + "\n");
    hogl::write_csv_matrix(args.theta_csv, fit.coefs.theta,
                           hogl::numbered_columns("theta_", prob.m));

    std::cout << "fit: df=" << df << " egcv=" << egcv_value
              << " converged=" << (fit.info.converged ? "yes" : "no") << " -> " << args.out_json
              << ", " << args.theta_csv << "\n";
    return 0;
}

int cmd_tune(const FitArgs& args, int n_deltas, int n_lambdas, bool delta_set, bool lambda_set,
             int threads, const std::string& grid_csv) {
    LoadedInputs inputs = [&] {
        try {
            return load_inputs(args);
        } catch (const std::exception& e) {
            std::cerr << "input error: " << e.what() << "\n";
            std::exit(kExitInput);
        }
    }();
    LoadedProblem loaded = build_loaded_problem(inputs);
    const auto& prob = loaded.prob;

    hogl::TuningGrid grid;
    if (delta_set && lambda_set) {  // pinned single cell
        grid.deltas = {args.delta};
        grid.lambdas = {{args.lambda}};
    } else {
        grid = hogl::make_grid(prob, loaded.weights, loaded.route, n_deltas, n_lambdas);
    }
    hogl::FitOptions opts;
    opts.tol = args.tol;
    opts.max_iter = args.max_iter;
    const double alpha = parse_egcv_exponent(args.egcv_exponent, prob.n, prob.p);
    const auto search =
        hogl::grid_search(prob, loaded.route, grid, loaded.weights, opts, alpha, threads);

    long failed_cells = 0;
    std::string cells_csv = "delta,lambda,egcv,df,converged,failed\n";
    for (const auto& cell : search.cells) {
        if (cell.failed) ++failed_cells;
        cells_csv += hogl::format_double(cell.delta);
        cells_csv += ',';
        cells_csv += hogl::format_double(cell.lambda);
        cells_csv += ',';
        cells_csv += cell.failed ? "nan" : hogl::format_double(cell.egcv);
        cells_csv += ',';
        cells_csv += std::to_string(cell.df);
        cells_csv += ',';
        cells_csv += cell.converged ? "1" : "0";
        cells_csv += ',';
        cells_csv += cell.failed ? "1" : "0";
        cells_csv += '\n';
    }
    hogl::write_text_atomic(grid_csv, cells_csv);
    if (failed_cells > 0) {
        std::cerr << "warning: " << failed_cells << " grid cells failed and were skipped\n";
    }

    const auto& best = search.best;
    json out;
    out["delta"] = best.delta;
    out["lambda"] = best.lambda;
    out["lambda_max"] = best.lambda_max;
    out["df"] = best.df;
    out["egcv"] = best.egcv;
    out["converged"] = best.converged;
    out["mu_hat"] = std::vector<double>(best.mu_hat.data(), best.mu_hat.data() + prob.p);
    out.update(model_json(best.model));
    out.update(coefficients_json(best.coefs));
    hogl::write_text_atomic(args.out_json, out.dump(2) + "\n");
    hogl::write_csv_matrix(args.theta_csv, best.coefs.theta,
                           hogl::numbered_columns("theta_", prob.m));

    std::cout << "tune: best delta=" << best.delta << " lambda=" << best.lambda
              << " df=" << best.df << " egcv=" << best.egcv << " -> " << args.out_json << ", "
              << grid_csv << "\n";
    return 0;
}

struct SimulateArgs {
    hogl::SimConfig config;
    std::string methods = "both";
    std::string preset;
    std::string egcv_exponent = "log-np";
    std::string out_csv = "metrics.csv";
    std::string out_json = "replications.json";
};

int cmd_simulate(SimulateArgs& args, int threads) {
    auto& config = args.config;
    if (args.methods == "hogl1") {
        config.run_bcd = false;
    } else if (args.methods == "hogl2") {
        config.run_mm = false;
    } else if (args.methods != "both") {
        std::cerr << "input error: --methods must be hogl1, hogl2, or both\n";
        return kExitInput;
    }
    config.threads = threads;
    try {
        config.egcv_alpha = parse_egcv_exponent(args.egcv_exponent, config.n, config.p);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    }

    hogl::MetricsTable table;
    try {
        table = hogl::run_monte_carlo(config);
    } catch (const hogl::InvalidDimension& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    }

    std::string csv = "method,reps,failed,variable_sp,degree_sp,mse_f,mse_c\n";
    for (const auto& m : table.methods) {
        csv += m.method + ',' + std::to_string(m.reps_done) + ',' + std::to_string(m.reps_failed) +
               ',' + hogl::format_double(m.variable_sp) + ',' + hogl::format_double(m.degree_sp) +
               ',' + hogl::format_double(m.mse_f) + ',' + hogl::format_double(m.mse_c) + '\n';
    }
    hogl::write_text_atomic(args.out_csv, csv);

    json detail;
    detail["config"] = {{"n", config.n},       {"p", config.p},
                        {"k", config.k},       {"q", config.q},
                        {"snr", config.snr},   {"reps", config.reps},
                        {"seed", config.seed}, {"rho", config.rho},
                        {"n_delta", config.n_delta}, {"n_lambda", config.n_lambda}};
    detail["replications"] = json::array();
    for (const auto& r : table.detail) {
        json rec;
        rec["rep"] = r.rep;
        rec["method"] = r.method;
        rec["ok"] = r.ok;
        if (!r.ok) rec["error"] = r.error;
        json vars = json::array();
        for (int v : r.variables) vars.push_back(v + 1);
        rec["selected_variables"] = std::move(vars);
        rec["degrees"] = r.degrees;
        rec["delta"] = r.delta;
        rec["lambda"] = r.lambda;
        rec["egcv"] = r.egcv;
        rec["df"] = r.df;
        rec["mse_f"] = r.mse_f;
        rec["mse_c"] = r.mse_c;
        rec["converged"] = r.converged;
        rec["exact_variables"] = r.exact_variables;
        rec["exact_degrees"] = r.exact_degrees;
        detail["replications"].push_back(std::move(rec));
    }
    hogl::write_text_atomic(args.out_json, detail.dump(2) + "\n");

    std::cout << "n=" << config.n << " p=" << config.p << " k=" << config.k << " q=" << config.q
              << " snr=" << config.snr << " reps=" << config.reps << " seed=" << config.seed
              << "\n";
    std::cout << std::left << std::setw(8) << "method" << std::right << std::setw(10) << "var_sp"
              << std::setw(10) << "deg_sp" << std::setw(12) << "mse_f" << std::setw(12) << "mse_c"
              << std::setw(12) << "sec/rep" << std::setw(8) << "failed" << "\n";
    for (const auto& m : table.methods) {
        std::cout << std::left << std::setw(8) << m.method << std::right << std::fixed
                  << std::setprecision(1) << std::setw(10) << m.variable_sp << std::setw(10)
                  << m.degree_sp << std::setprecision(4) << std::setw(12) << m.mse_f
                  << std::setw(12) << m.mse_c << std::setw(12) << m.mean_seconds << std::setw(8)
                  << m.reps_failed << "\n";
        std::cout.unsetf(std::ios::fixed);
    }
    std::cout << "wrote " << args.out_csv << " and " << args.out_json << "\n";
    return 0;
}

struct ProxCheckArgs {
    int count = 1000;
    std::uint64_t seed = 0;
    int fixed_q = 0;  // 0 means random in 1..max_q
    int max_q = 8;
    int max_block = 3;
    int perturbations = 20;
    double tol = 1e-8;
    bool inject_fault = false;
};

int cmd_prox_check(const ProxCheckArgs& args) {
    hogl::Rng rng(args.seed ^ 0x70726f78ULL);
    double max_residual = 0.0;
    long kkt_failures = 0, monotonicity_violations = 0, alpha_mismatches = 0,
         perturbation_failures = 0;

    for (int trial = 0; trial < args.count; ++trial) {
        hogl::ProxProblem prob;
        const int q = args.fixed_q > 0
                          ? args.fixed_q
                          : 1 + static_cast<int>(rng.uniform01() * args.max_q) % args.max_q;
        prob.block_sizes.resize(q);
        int m = 0;
        for (int j = 0; j < q; ++j) {
            prob.block_sizes[j] =
                1 + static_cast<int>(rng.uniform01() * args.max_block) % args.max_block;
            m += prob.block_sizes[j];
        }
        prob.b.resize(m);
        for (int i = 0; i < m; ++i) prob.b[i] = rng.normal();
        prob.lambda.resize(q);
        for (int j = 0; j < q; ++j) prob.lambda[j] = rng.uniform(0.0, 2.0);

        Vector gamma = hogl::prox_solve(prob);
        if (args.inject_fault) gamma[0] += 1e-3;

        const auto report = hogl::verify_kkt(gamma, prob, args.tol);
        max_residual = std::max(max_residual, report.residual);
        if (!report.ok) ++kkt_failures;

        const Matrix table = hogl::d_table(prob);
        for (int alpha = 1; alpha < q; ++alpha) {
            for (int j = alpha + 1; j <= q; ++j) {
                if (table(alpha - 1, j - 1) < table(alpha, j - 1)) ++monotonicity_violations;
            }
        }
        if (hogl::search_alpha_star(prob).alpha_star != hogl::alpha_star_from_table(table)) {
            ++alpha_mismatches;
        }

        const double f_star = hogl::evaluate_objective(gamma, prob);
        for (int pert = 0; pert < args.perturbations; ++pert) {
            Vector u(m);
            for (int i = 0; i < m; ++i) u[i] = rng.normal();
            u.normalize();
            const double eps = std::pow(10.0, -3.0 + pert % 4);
            if (hogl::evaluate_objective(gamma + eps * u, prob) < f_star - 1e-12) {
                ++perturbation_failures;
            }
        }
    }

    std::cout << "prox-check: " << args.count << " random problems (q "
              << (args.fixed_q > 0 ? std::to_string(args.fixed_q)
                                   : "1.." + std::to_string(args.max_q))
              << ", blocks 1.." << args.max_block << ")\n";
    std::cout << "  max KKT residual:            " << max_residual << " (tol " << args.tol
              << ", failures " << kkt_failures << ")\n";
    std::cout << "  monotonicity violations:     " << monotonicity_violations << "\n";
    std::cout << "  scan vs exhaustive mismatches: " << alpha_mismatches << "\n";
    std::cout << "  perturbation descent failures: " << perturbation_failures << "\n";

    const bool ok = kkt_failures == 0 && monotonicity_violations == 0 && alpha_mismatches == 0 &&
                    perturbation_failures == 0;
    std::cout << (ok ? "OK" : "VIOLATIONS FOUND") << "\n";
    return ok ? 0 : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        expand_config_args(args);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    }

    CLI::App app{"Hierarchical overlapping group lasso for the GMANOVA model"};
    app.require_subcommand(1);
    int threads_flag = 0;

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "fit at a fixed (delta, lambda)");
    fit_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_fit_inputs(fit_cmd, fit_args);
    fit_cmd->add_option("--delta", fit_args.delta, "penalty balance in [0, 1]");
    fit_cmd->add_option("--lambda", fit_args.lambda, "penalty level")->required();
    fit_cmd->add_option("--out", fit_args.out_json, "output JSON path");
    fit_cmd->add_option("--theta-csv", fit_args.theta_csv, "output CSV for theta");

    FitArgs tune_args;
    tune_args.out_json = "tune_result.json";
    int n_deltas = 10, n_lambdas = 100;
    std::string grid_csv = "grid.csv";
    auto* tune_cmd = app.add_subcommand("tune", "grid search over (delta, lambda) by EGCV");
    tune_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_fit_inputs(tune_cmd, tune_args);
    auto* tune_delta = tune_cmd->add_option("--delta", tune_args.delta, "pin a single delta");
    auto* tune_lambda = tune_cmd->add_option("--lambda", tune_args.lambda, "pin a single lambda");
    tune_cmd->add_option("--deltas", n_deltas, "number of delta candidates");
    tune_cmd->add_option("--lambdas", n_lambdas, "number of lambda candidates per delta");
    tune_cmd->add_option("--out", tune_args.out_json, "output JSON path");
    tune_cmd->add_option("--theta-csv", tune_args.theta_csv, "output CSV for theta");
    tune_cmd->add_option("--grid-csv", grid_csv, "per-cell grid CSV path");
    tune_cmd->add_option("--threads", threads_flag,
                         "worker threads (default: HOGL_THREADS or all cores)");

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo study of the estimators");
    sim_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    auto* opt_n = sim_cmd->add_option("--n", sim_args.config.n, "individuals");
    auto* opt_p = sim_cmd->add_option("--p", sim_args.config.p, "time points");
    auto* opt_k = sim_cmd->add_option("--k", sim_args.config.k, "explanatory variables");
    auto* opt_q = sim_cmd->add_option("--q", sim_args.config.q, "polynomial levels");
    auto* opt_snr = sim_cmd->add_option("--snr", sim_args.config.snr, "target signal-to-noise");
    sim_cmd->add_option("--reps", sim_args.config.reps, "replications");
    sim_cmd->add_option("--seed", sim_args.config.seed, "RNG seed");
    sim_cmd->add_option("--rho", sim_args.config.rho, "autocorrelation");
    sim_cmd->add_option("--methods", sim_args.methods, "hogl1, hogl2, or both");
    sim_cmd->add_option("--deltas", sim_args.config.n_delta, "delta candidates");
    sim_cmd->add_option("--lambdas", sim_args.config.n_lambda, "lambda candidates per delta");
    sim_cmd->add_option("--egcv-exponent", sim_args.egcv_exponent, "log-np, sqrt-np, or a number");
    sim_cmd->add_option("--tol", sim_args.config.fit.tol, "fit convergence tolerance");
    sim_cmd->add_option("--max-iter", sim_args.config.fit.max_iter, "fit iteration cap");
    sim_cmd->add_option("--preset", sim_args.preset,
                        "base-cell, high-degree-cell, or snr3-cell (defaults for n,p,k,q,snr)");
    sim_cmd->add_option("--out-csv", sim_args.out_csv, "metrics CSV path");
    sim_cmd->add_option("--out-json", sim_args.out_json, "per-replication JSON path");
    sim_cmd->add_option("--threads", threads_flag,
                        "worker threads (default: HOGL_THREADS or all cores)");

    ProxCheckArgs prox_args;
    auto* prox_cmd = app.add_subcommand("prox-check", "property suite for the proximal operator");
    prox_cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    prox_cmd->add_option("--count", prox_args.count, "number of random problems");
    prox_cmd->add_option("--seed", prox_args.seed, "RNG seed");
    prox_cmd->add_option("--q", prox_args.fixed_q, "fix the level count");
    prox_cmd->add_option("--max-q", prox_args.max_q, "maximum random level count");
    prox_cmd->add_option("--max-block", prox_args.max_block, "maximum block size");
    prox_cmd->add_option("--perturbations", prox_args.perturbations, "descent probes per problem");
    prox_cmd->add_option("--tol", prox_args.tol, "KKT residual tolerance");
    prox_cmd->add_flag("--inject-fault", prox_args.inject_fault,
                       "corrupt solutions before checking (negative control)");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return kExitInput;
    }

    const int threads = thread_count_from(threads_flag);

    try {
        if (*fit_cmd) {
            if (fit_args.lambda < 0.0) {
                std::cerr << "input error: --lambda must be non-negative\n";
                return kExitInput;
            }
            if (fit_args.delta < 0.0 || fit_args.delta > 1.0) {
                std::cerr << "input error: --delta must lie in [0, 1]\n";
                return kExitInput;
            }
            return cmd_fit(fit_args);
        }
        if (*tune_cmd) {
            if (tune_delta->count() > 0 && (tune_args.delta < 0.0 || tune_args.delta > 1.0)) {
                std::cerr << "input error: --delta must lie in [0, 1]\n";
                return kExitInput;
            }
            if (tune_lambda->count() > 0 && tune_args.lambda < 0.0) {
                std::cerr << "input error: --lambda must be non-negative\n";
                return kExitInput;
            }
            return cmd_tune(tune_args, n_deltas, n_lambdas, tune_delta->count() > 0,
                            tune_lambda->count() > 0, threads, grid_csv);
        }
        if (*sim_cmd) {
            if (!sim_args.preset.empty()) {
                int n = 0, p = 0, k = 0, q = 0;
                double snr = 1.0;
                if (sim_args.preset == "base-cell") {
                    n = 100; p = 10; k = 10; q = 6; snr = 1.0;
                } else if (sim_args.preset == "high-degree-cell") {
                    n = 100; p = 10; k = 10; q = 10; snr = 1.0;
                } else if (sim_args.preset == "snr3-cell") {
                    n = 300; p = 10; k = 10; q = 6; snr = 3.0;
                } else {
                    std::cerr << "input error: unknown --preset " << sim_args.preset << "\n";
                    return kExitInput;
                }
                if (opt_n->count() == 0) sim_args.config.n = n;
                if (opt_p->count() == 0) sim_args.config.p = p;
                if (opt_k->count() == 0) sim_args.config.k = k;
                if (opt_q->count() == 0) sim_args.config.q = q;
                if (opt_snr->count() == 0) sim_args.config.snr = snr;
            }
            return cmd_simulate(sim_args, threads);
        }
        if (*prox_cmd) {
            return cmd_prox_check(prox_args);
        }
    } catch (const hogl::Error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return 0;
}
