#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hogl/basis.hpp"
#include "hogl/rng.hpp"
#include "hogl/solver.hpp"
#include "hogl/tuning.hpp"
#include "hogl/types.hpp"

namespace hogl {

struct SimConfig {
    int n = 100, p = 10, k = 10, q = 6;
    double snr = 1.0;
    int reps = 200;
    std::uint64_t seed = 0;
    double rho = 0.5;
    bool run_mm = true;   // HOGL1
    bool run_bcd = true;  // HOGL2
    double egcv_alpha = 0.0;  // 0 means log(np)
    int n_delta = 10;
    int n_lambda = 100;
    FitOptions fit;
    int threads = 1;
};

// Ground truth for one configuration: the fixed 5 x 6 signal block scaled to
// hit the target SNR, autocorrelated design and noise covariances, and the
// polynomial basis on the uniform grid.
struct SimTruth {
    Matrix theta;  // k x q, exactly k* = 5 non-zero rows
    Matrix psi;    // k x k design covariance scale
    Matrix sigma;  // p x p noise covariance
    Matrix psi_sqrt, sigma_sqrt, sigma_inv;
    double nu = 0.0;
    Matrix X;  // p x q polynomial basis
    TimeGrid grid;
    BasisSpec basis;
};

// Autocorrelation matrix with entries rho^{|i-j|}.
Matrix autocorrelation(int size, double rho);

SimTruth build_truth(const SimConfig& config);

// Scale nu such that the SNR of nu * theta_base equals target; SNR is
// quadratic in nu, so the calibration is exact.
double calibrate_nu(const SimConfig& config, const Matrix& theta_base, const Matrix& psi,
                    const Matrix& sigma, const Matrix& X);

// One draw of (Y, A_raw): uniform design rows correlated through psi^{1/2},
// matrix-normal noise through the symmetric sigma^{1/2}.
std::pair<Matrix, Matrix> generate_dataset(const SimTruth& truth, const SimConfig& config,
                                           Rng& rng);

// (MSE_f, MSE_c) against the truth for one replication.
std::pair<double, double> mse_metrics(const Matrix& theta_hat_raw, const Matrix& y_hat,
                                      const SimTruth& truth, const Matrix& A_raw);

struct RepRecord {
    int rep = 0;
    std::string method;
    bool ok = false;
    std::string error;
    std::vector<int> variables;
    std::vector<int> degrees;
    double delta = 0.0, lambda = 0.0, egcv = 0.0;
    long df = 0;
    double mse_f = 0.0, mse_c = 0.0;
    bool converged = false;
    bool exact_variables = false;
    bool exact_degrees = false;
    double seconds = 0.0;
};

struct MethodSummary {
    std::string method;
    int reps_done = 0;
    int reps_failed = 0;
    double variable_sp = 0.0;  // percent
    double degree_sp = 0.0;    // percent
    double mse_f = 0.0;
    double mse_c = 0.0;
    double mean_seconds = 0.0;
};

struct MetricsTable {
    std::vector<MethodSummary> methods;
    std::vector<RepRecord> detail;
};

// Runs the replication loop; each replication owns an independent RNG stream
// derived from (seed, rep) and fits every requested method on the same data.
MetricsTable run_monte_carlo(const SimConfig& config);

}  // namespace hogl
