#pragma once

#include <vector>

#include "hogl/solver.hpp"
#include "hogl/types.hpp"

namespace hogl {

// Candidate grid: deltas paired with a descending log-spaced lambda path per
// delta, anchored at lambda_max(delta).
struct TuningGrid {
    std::vector<double> deltas;
    std::vector<std::vector<double>> lambdas;  // one descending path per delta
};

TuningGrid make_grid(const GmanovaProblem& prob, const Matrix& base_weights, Route route,
                     int n_delta = 10, int n_lambda = 100, double floor_ratio = 1e-4);

// Extended GCV: tr{(Y - Y_hat)'(Y - Y_hat) S^{-1}} / (1 - df/np)^alpha.
double egcv(const Matrix& Y, const Matrix& Y_hat, const Matrix& S, long df, double alpha_exp);

inline double egcv_alpha_log_np(int n, int p) { return std::log(static_cast<double>(n) * p); }
inline double egcv_alpha_sqrt_np(int n, int p) { return std::sqrt(static_cast<double>(n) * p); }

// Number of exactly non-zero entries on the route's native coefficient
// matrix (xi for BCD, theta for MM); the location estimate is excluded.
long count_df(const Coefficients& coefs);

// Variables with a non-zero row and the per-variable level count expressed
// as a polynomial degree: q - 1 - (leading zero levels). Excluded variables
// carry degree -1.
struct SelectedModel {
    std::vector<int> variables;  // 0-based indices of rows with any signal
    std::vector<int> degrees;    // size k; -1 for excluded variables
};

SelectedModel selected_model(const Coefficients& coefs, const BasisSpec& basis);

struct GridCell {
    double delta = 0.0;
    double lambda = 0.0;
    double egcv = 0.0;
    long df = 0;
    bool converged = false;
    bool failed = false;
};

struct FitResult {
    Vector mu_hat;
    Coefficients coefs;
    double delta = 0.0;
    double lambda = 0.0;
    long df = 0;
    double egcv = 0.0;
    double lambda_max = 0.0;  // for the selected delta
    SelectedModel model;
    bool converged = false;
};

struct GridSearchOutput {
    FitResult best;
    std::vector<GridCell> cells;  // row-major over (delta, lambda)
};

// Fits every cell with warm starts along each lambda path and returns the
// EGCV minimizer; ties break toward smaller df, then larger lambda. Paths at
// different deltas may run concurrently.
GridSearchOutput grid_search(const GmanovaProblem& prob, Route route, const TuningGrid& grid,
                             const Matrix& base_weights, const FitOptions& opts,
                             double egcv_alpha, int threads = 1);

// Fitted values 1 mu' + A Theta X' on the standardized design.
Matrix fitted_values(const GmanovaProblem& prob, const Coefficients& coefs);

}  // namespace hogl
