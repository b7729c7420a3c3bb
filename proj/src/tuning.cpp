#include "hogl/tuning.hpp"

#include <cmath>
#include <limits>

#include "hogl/errors.hpp"
#include "hogl/parallel.hpp"

namespace hogl {

namespace {

// Residual trace computed in coefficient space; only valid for coefficients
// produced against the same problem.
double egcv_numerator_mm(const Matrix& theta, const GmanovaProblem& prob) {
    const double linear = (theta.array() * prob.cross_v.array()).sum();
    const double quad = (theta.array() * (prob.gram_a * theta * prob.gram_v).array()).sum();
    return prob.uc_sqnorm - 2.0 * linear + quad;
}

double egcv_numerator_bcd(const Matrix& xi, const GmanovaProblem& prob) {
    const double linear = (xi.array() * prob.cross_h.array()).sum();
    const double quad = (xi.array() * (prob.gram_a * xi).array()).sum();
    return prob.uc_sqnorm - 2.0 * linear + quad;
}

double egcv_from_numerator(double numerator, long df, long np, double alpha_exp) {
    if (df >= np) throw DfTooLarge("egcv: df must be below n*p");
    const double ratio = 1.0 - static_cast<double>(df) / static_cast<double>(np);
    return numerator / std::pow(ratio, alpha_exp);
}

struct PathBest {
    bool valid = false;
    GridCell cell;
    Coefficients coefs;
    bool converged = false;
};

bool cell_improves(const GridCell& cand, const GridCell& best) {
    if (cand.egcv != best.egcv) return cand.egcv < best.egcv;
    if (cand.df != best.df) return cand.df < best.df;
    return cand.lambda > best.lambda;
}

}  // namespace

TuningGrid make_grid(const GmanovaProblem& prob, const Matrix& base_weights, Route route,
                     int n_delta, int n_lambda, double floor_ratio) {
    if (n_delta < 1 || n_lambda < 1) throw InvalidDimension("make_grid: counts must be positive");
    TuningGrid grid;
    grid.deltas.resize(n_delta);
    for (int i = 0; i < n_delta; ++i) {
        grid.deltas[i] = n_delta == 1 ? 1.0 : static_cast<double>(i) / (n_delta - 1);
    }
    grid.lambdas.resize(n_delta);
    for (int i = 0; i < n_delta; ++i) {
        const double lmax = lambda_max(prob, grid.deltas[i], base_weights, route);
        auto& path = grid.lambdas[i];
        path.resize(n_lambda);
        for (int j = 0; j < n_lambda; ++j) {
            path[j] = n_lambda == 1
                          ? lmax
                          : lmax * std::pow(floor_ratio, static_cast<double>(j) / (n_lambda - 1));
        }
    }
    return grid;
}

double egcv(const Matrix& Y, const Matrix& Y_hat, const Matrix& S, long df, double alpha_exp) {
    if (Y.rows() != Y_hat.rows() || Y.cols() != Y_hat.cols()) {
        throw DimensionMismatch("egcv: Y and Y_hat shapes differ");
    }
    const Matrix resid = Y - Y_hat;
    const Matrix solved = S.llt().solve(resid.transpose());  // S^{-1} resid'
    const double numerator = (resid.array() * solved.transpose().array()).sum();
    const long np = static_cast<long>(Y.rows()) * static_cast<long>(Y.cols());
    return egcv_from_numerator(numerator, df, np, alpha_exp);
}

long count_df(const Coefficients& coefs) {
    const Matrix& native = coefs.has_xi ? coefs.xi : coefs.theta;
    long df = 0;
    for (Index i = 0; i < native.size(); ++i) {
        if (*(native.data() + i) != 0.0) ++df;
    }
    return df;
}

SelectedModel selected_model(const Coefficients& coefs, const BasisSpec& basis) {
    const Matrix& native = coefs.has_xi ? coefs.xi : coefs.theta;
    const int q = basis.levels;
    SelectedModel model;
    model.degrees.assign(native.rows(), -1);
    for (int l = 0; l < native.rows(); ++l) {
        int leading = 0;
        int offset = 0;
        while (leading < q &&
               (native.row(l).segment(offset, basis.block_sizes[leading]).array() == 0.0).all()) {
            offset += basis.block_sizes[leading];
            ++leading;
        }
        if (leading < q) {
            model.variables.push_back(l);
            model.degrees[l] = q - 1 - leading;
        }
    }
    return model;
}

Matrix fitted_values(const GmanovaProblem& prob, const Coefficients& coefs) {
    return Vector::Ones(prob.n) * prob.mu_hat.transpose() +
           prob.A * coefs.theta * prob.X.transpose();
}

GridSearchOutput grid_search(const GmanovaProblem& prob, Route route, const TuningGrid& grid,
                             const Matrix& base_weights, const FitOptions& opts,
                             double egcv_alpha, int threads) {
    const std::size_t n_delta = grid.deltas.size();
    if (n_delta == 0 || grid.lambdas.size() != n_delta) {
        throw InvalidDimension("grid_search: empty or inconsistent grid");
    }
    const long np = static_cast<long>(prob.n) * static_cast<long>(prob.p);

    std::vector<PathBest> best_per_delta(n_delta);
    std::vector<std::vector<GridCell>> cells_per_delta(n_delta);

    parallel_for(n_delta, threads, [&](std::size_t di) {
        const double delta = grid.deltas[di];
        const auto& path = grid.lambdas[di];
        auto& cells = cells_per_delta[di];
        cells.reserve(path.size());
        PathBest& best = best_per_delta[di];

        Matrix init = Matrix::Zero(prob.k, prob.m);
        for (double lambda : path) {
            GridCell cell;
            cell.delta = delta;
            cell.lambda = lambda;
            try {
                PenaltySpec spec{delta, lambda, base_weights};
                FitOutput fit = route == Route::mm ? fit_mm(prob, spec, init, opts)
                                                   : fit_bcd(prob, spec, init, opts);
                const Matrix& native = fit.coefs.has_xi ? fit.coefs.xi : fit.coefs.theta;
                init = native;  // warm start for the next smaller lambda
                cell.df = count_df(fit.coefs);
                const double numerator = route == Route::mm
                                             ? egcv_numerator_mm(fit.coefs.theta, prob)
                                             : egcv_numerator_bcd(fit.coefs.xi, prob);
                cell.egcv = egcv_from_numerator(numerator, cell.df, np, egcv_alpha);
                cell.converged = fit.info.converged;
                if (!std::isfinite(cell.egcv)) throw Error("non-finite EGCV");
                if (!best.valid || cell_improves(cell, best.cell)) {
                    best.valid = true;
                    best.cell = cell;
                    best.coefs = fit.coefs;
                    best.converged = fit.info.converged;
                }
            } catch (const std::exception&) {
                cell.failed = true;
            }
            cells.push_back(cell);
        }
    });

    GridSearchOutput out;
    std::ptrdiff_t best_di = -1;
    for (std::size_t di = 0; di < n_delta; ++di) {
        const PathBest& cand = best_per_delta[di];
        if (cand.valid &&
            (best_di < 0 || cell_improves(cand.cell, best_per_delta[best_di].cell))) {
            best_di = static_cast<std::ptrdiff_t>(di);
        }
        for (auto& cell : cells_per_delta[di]) out.cells.push_back(cell);
    }
    if (best_di < 0) throw Error("grid_search: every cell failed");

    const PathBest& winner = best_per_delta[best_di];
    out.best.coefs = winner.coefs;
    out.best.delta = winner.cell.delta;
    out.best.lambda = winner.cell.lambda;
    out.best.df = winner.cell.df;
    out.best.egcv = winner.cell.egcv;
    out.best.converged = winner.converged;
    out.best.lambda_max = grid.lambdas[best_di].empty() ? 0.0 : grid.lambdas[best_di].front();
    out.best.mu_hat = prob.mu_hat;
    out.best.model = selected_model(out.best.coefs, prob.basis);
    return out;
}

}  // namespace hogl
