#include "hogl/simulation.hpp"

#include <chrono>
#include <cmath>

#include "hogl/errors.hpp"
#include "hogl/parallel.hpp"

namespace hogl {

namespace {

constexpr int kTrueVariables = 5;

Matrix signal_block() {
    Matrix block(kTrueVariables, 6);
    block << 0, 0, 0, 0, -3, 0.5,
             0, 0, 0, 4, 1, -2,
             0, 0, 6, -2, -4, 2,
             0, 12, 3, -12, -3, 1.5,
             -12, -1, 15, 1, -1, -0.5;
    return block;
}

Matrix scaled_correlation(int size, double rho) {
    // R^{1/2} Omega(rho) R^{1/2} with R = diag(1..size)
    const Matrix omega = autocorrelation(size, rho);
    Vector root(size);
    for (int i = 0; i < size; ++i) root[i] = std::sqrt(static_cast<double>(i + 1));
    return root.asDiagonal() * omega * root.asDiagonal();
}

Matrix sym_sqrt(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() *
           eig.eigenvectors().transpose();
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Matrix autocorrelation(int size, double rho) {
    Matrix omega(size, size);
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            omega(i, j) = std::pow(rho, std::abs(i - j));
        }
    }
    return omega;
}

double calibrate_nu(const SimConfig& config, const Matrix& theta_base, const Matrix& psi,
                    const Matrix& sigma, const Matrix& X) {
    const int p = config.p;
    double snr_at_one = 0.0;
    const Matrix quad = theta_base.transpose() * psi * theta_base;  // q x q
    for (int j = 0; j < p; ++j) {
        const Vector xj = X.row(j).transpose();
        snr_at_one += xj.dot(quad * xj) / sigma(j, j);
    }
    snr_at_one /= 3.0 * p;
    if (snr_at_one <= 0.0) throw ZeroSignal("calibrate_nu: zero signal at unit scale");
    return std::sqrt(config.snr / snr_at_one);
}

SimTruth build_truth(const SimConfig& config) {
    if (config.q < 6) throw InvalidDimension("build_truth: need q >= 6");
    if (config.k < kTrueVariables) throw InvalidDimension("build_truth: need k >= 5");
    if (config.p < config.q) throw InvalidDimension("build_truth: need p >= q");
    if (config.n <= config.k + 1) throw InvalidDimension("build_truth: need n > k + 1");

    SimTruth truth;
    truth.grid = uniform_time_points(config.p);
    truth.X = polynomial_basis(truth.grid, config.q);
    truth.basis = polynomial_spec(config.q);
    truth.psi = scaled_correlation(config.k, config.rho);
    truth.sigma = scaled_correlation(config.p, config.rho);
    truth.psi_sqrt = sym_sqrt(truth.psi);
    truth.sigma_sqrt = sym_sqrt(truth.sigma);
    truth.sigma_inv = truth.sigma.llt().solve(Matrix::Identity(config.p, config.p));

    Matrix base = Matrix::Zero(config.k, config.q);
    base.block(0, config.q - 6, kTrueVariables, 6) = signal_block();
    truth.nu = calibrate_nu(config, base, truth.psi, truth.sigma, truth.X);
    truth.theta = truth.nu * base;
    return truth;
}

std::pair<Matrix, Matrix> generate_dataset(const SimTruth& truth, const SimConfig& config,
                                           Rng& rng) {
    const int n = config.n;
    const int p = config.p;
    const int k = config.k;
    Matrix a0(n, k);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) a0(i, j) = rng.uniform(-1.0, 1.0);
    }
    Matrix noise(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) noise(i, j) = rng.normal();
    }
    Matrix a_raw = a0 * truth.psi_sqrt;
    Matrix y = a_raw * truth.theta * truth.X.transpose() + noise * truth.sigma_sqrt;
    return {std::move(y), std::move(a_raw)};
}

std::pair<double, double> mse_metrics(const Matrix& theta_hat_raw, const Matrix& y_hat,
                                      const SimTruth& truth, const Matrix& A_raw) {
    const auto n = A_raw.rows();
    const auto p = truth.sigma.rows();
    const Matrix mean_true = A_raw * truth.theta * truth.X.transpose();
    const Matrix err = y_hat - mean_true;
    const double mse_f =
        (err.array() * (err * truth.sigma_inv).array()).sum() / static_cast<double>(n * p);
    const double mse_c =
        (theta_hat_raw - truth.theta).squaredNorm() / static_cast<double>(truth.theta.size());
    return {mse_f, mse_c};
}

MetricsTable run_monte_carlo(const SimConfig& config) {
    const SimTruth truth = build_truth(config);
    const double egcv_alpha =
        config.egcv_alpha > 0.0 ? config.egcv_alpha : egcv_alpha_log_np(config.n, config.p);

    std::vector<std::pair<Route, std::string>> methods;
    if (config.run_mm) methods.emplace_back(Route::mm, "HOGL1");
    if (config.run_bcd) methods.emplace_back(Route::bcd, "HOGL2");
    if (methods.empty()) throw InvalidDimension("run_monte_carlo: no method requested");
    if (config.reps < 1) throw InvalidDimension("run_monte_carlo: need reps >= 1");

    std::vector<std::vector<RepRecord>> records(config.reps);

    parallel_for(config.reps, config.threads, [&](std::size_t rep) {
        Rng rng = Rng::for_replication(config.seed, rep);
        auto [y, a_raw] = generate_dataset(truth, config, rng);
        auto& rep_records = records[rep];

        GmanovaProblem prob;
        bool prob_ok = true;
        std::string prob_error;
        try {
            prob = build_problem(y, a_raw, truth.X, truth.basis);
        } catch (const std::exception& e) {
            prob_ok = false;
            prob_error = e.what();
        }

        for (const auto& [route, name] : methods) {
            RepRecord rec;
            rec.rep = static_cast<int>(rep);
            rec.method = name;
            const auto start = std::chrono::steady_clock::now();
            try {
                if (!prob_ok) throw Error(prob_error);
                const Matrix weights = adaptive_weights(prob, route);
                const TuningGrid grid =
                    make_grid(prob, weights, route, config.n_delta, config.n_lambda);
                GridSearchOutput search =
                    grid_search(prob, route, grid, weights, config.fit, egcv_alpha, 1);
                const FitResult& best = search.best;

                // map back to raw-design units for comparison with the truth
                const Matrix theta_raw =
                    prob.a_scales.cwiseInverse().asDiagonal() * best.coefs.theta;
                const Matrix y_hat = fitted_values(prob, best.coefs);
                const auto [mse_f, mse_c] = mse_metrics(theta_raw, y_hat, truth, a_raw);

                rec.ok = true;
                rec.variables = best.model.variables;
                rec.degrees = best.model.degrees;
                rec.delta = best.delta;
                rec.lambda = best.lambda;
                rec.egcv = best.egcv;
                rec.df = best.df;
                rec.mse_f = mse_f;
                rec.mse_c = mse_c;
                rec.converged = best.converged;

                bool exact_vars = static_cast<int>(best.model.variables.size()) == kTrueVariables;
                if (exact_vars) {
                    for (int l = 0; l < kTrueVariables; ++l) {
                        exact_vars = exact_vars && best.model.variables[l] == l;
                    }
                }
                rec.exact_variables = exact_vars;
                bool exact_degrees = exact_vars;
                if (exact_degrees) {
                    for (int l = 0; l < kTrueVariables; ++l) {
                        exact_degrees = exact_degrees && best.model.degrees[l] == l + 1;
                    }
                }
                rec.exact_degrees = exact_degrees;
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.error = e.what();
            }
            rec.seconds = elapsed_seconds(start);
            rep_records.push_back(std::move(rec));
        }
    });

    MetricsTable table;
    for (const auto& [route, name] : methods) {
        (void)route;
        MethodSummary summary;
        summary.method = name;
        for (const auto& rep_records : records) {
            for (const auto& rec : rep_records) {
                if (rec.method != name) continue;
                if (!rec.ok) {
                    ++summary.reps_failed;
                    continue;
                }
                ++summary.reps_done;
                summary.variable_sp += rec.exact_variables ? 1.0 : 0.0;
                summary.degree_sp += rec.exact_degrees ? 1.0 : 0.0;
                summary.mse_f += rec.mse_f;
                summary.mse_c += rec.mse_c;
                summary.mean_seconds += rec.seconds;
            }
        }
        if (summary.reps_done > 0) {
            summary.variable_sp *= 100.0 / summary.reps_done;
            summary.degree_sp *= 100.0 / summary.reps_done;
            summary.mse_f /= summary.reps_done;
            summary.mse_c /= summary.reps_done;
            summary.mean_seconds /= summary.reps_done;
        }
        table.methods.push_back(std::move(summary));
    }
    for (auto& rep_records : records) {
        for (auto& rec : rep_records) table.detail.push_back(std::move(rec));
    }
    return table;
}

}  // namespace hogl
