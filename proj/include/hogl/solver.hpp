#pragma once

#include <vector>

#include "hogl/basis.hpp"
#include "hogl/matrix_kernels.hpp"
#include "hogl/types.hpp"

namespace hogl {

enum class Route { mm, bcd };

// Preprocessed working problem. Everything the solvers touch per iteration
// is precomputed here so that fits never form the n*p x k*m design.
struct GmanovaProblem {
    Matrix Y;        // n x p responses
    Matrix A;        // n x k, centered with unit-norm columns
    Vector a_means;  // centering/scaling applied to the raw design
    Vector a_scales;
    Matrix X;        // p x m basis
    BasisSpec basis;

    Matrix S;           // p x p unbiased covariance estimate
    Matrix S_inv_half;  // symmetric S^{-1/2}
    Vector mu_hat;      // column means of Y

    Matrix U;   // Y S^{-1/2}
    Matrix Uc;  // (Y - 1 mu') S^{-1/2}
    Matrix V;   // S^{-1/2} X
    FlippedQr vqr;

    double lipschitz = 0.0;  // max eigenvalue of Z'Z, Z = A (x) V

    // cached Gram/cross products
    Matrix gram_a;   // A'A, k x k
    Matrix gram_v;   // V'V, m x m
    Matrix cross_v;  // A'UV, k x m
    Matrix cross_h;  // A'UH, k x m
    double u_sqnorm = 0.0;
    double uc_sqnorm = 0.0;

    int n = 0, p = 0, k = 0, m = 0;
};

// S = Y' { I - 11'/n - A (A'A)^{-1} A' } Y / (n - k - 1) for a centered A.
Matrix unbiased_sigma(const Matrix& Y, const Matrix& A);

GmanovaProblem build_problem(const Matrix& Y, const Matrix& A_raw, const Matrix& X,
                             const BasisSpec& basis);

// Tuning pair plus adaptive base weights; the effective weight of level j is
// delta * w0 below the top level and w0 at the top level.
struct PenaltySpec {
    double delta = 1.0;
    double lambda = 0.0;
    Matrix base_weights;  // k x q, strictly positive

    double effective_weight(int row, int level, int levels) const {
        const double w0 = base_weights(row, level);
        return level + 1 < levels ? delta * w0 : w0;
    }
};

// Gradient of the residual sum of squares in coefficient-matrix form:
// A'A Theta V'V - A'UV. Row l is the gradient block for variable l.
Matrix gradient_rss(const Matrix& theta, const GmanovaProblem& prob);

// 0.5 | U - A Theta V' |_F^2, evaluated directly from the residual matrix.
double rss_value(const Matrix& theta, const GmanovaProblem& prob);

// Ordinary least squares estimators on either basis.
Matrix ols_theta(const GmanovaProblem& prob);
Matrix ols_xi(const GmanovaProblem& prob);

// Reciprocal prefix norms of the OLS estimator rows (route-specific), capped
// at 1e10 when a prefix norm underflows.
Matrix adaptive_weights(const GmanovaProblem& prob, Route route);

// Smallest penalty level that guarantees the all-zero coefficient matrix.
// Terms whose effective weight vanishes (delta = 0 below the top level) are
// covered by the whole-row group threshold instead.
double lambda_max(const GmanovaProblem& prob, double delta, const Matrix& base_weights,
                  Route route);

struct FitOptions {
    double tol = 1e-6;
    int max_iter = 10000;
    bool track_objective = false;
};

struct Coefficients {
    Matrix theta;  // k x m, polynomial-basis scale
    Matrix xi;     // k x m, orthonormal-basis scale (BCD route only)
    Route route = Route::mm;
    bool has_xi = false;
};

struct FitInfo {
    bool converged = false;
    int iterations = 0;
    std::vector<double> objective_trace;  // filled when track_objective is set
};

struct FitOutput {
    Coefficients coefs;
    FitInfo info;
};

// MM iteration: every row is refreshed from the surrogate target
// theta_l - r_l / L with penalties lambda w(delta) / L, via the closed-form
// prox. Stops when the relative sup-norm change drops below tol.
FitOutput fit_mm(const GmanovaProblem& prob, const PenaltySpec& spec, const Matrix& init_theta,
                 const FitOptions& opts = {});

// Cyclic block-wise coordinate descent on the orthonormal basis; each block
// target is c_l - sum_{j != l} (A'A)_{jl} xi_j with penalties lambda w(delta).
// Attaches theta = xi (Q')^{-1}.
FitOutput fit_bcd(const GmanovaProblem& prob, const PenaltySpec& spec, const Matrix& init_xi,
                  const FitOptions& opts = {});

// Penalized residual sum of squares for the given route, evaluated from the
// full residual matrix (not the cached quadratic form).
double prss_value(const Coefficients& coefs, const GmanovaProblem& prob,
                  const PenaltySpec& spec);

// Theta inherits the leading-zero structure of xi through the lower
// triangular solve Q theta' = xi'.
Matrix theta_from_xi(const Matrix& xi, const FlippedQr& vqr);

// Weighted hierarchical penalty sum_{l,j} w_{l,j}(delta) |prefix_{l,j}| for
// coefficient rows on the given block structure (lambda not applied).
double penalty_omega(const Matrix& coef_rows, const PenaltySpec& spec, const BasisSpec& basis);

}  // namespace hogl
