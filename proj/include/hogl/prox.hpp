#pragma once

#include <vector>

#include "hogl/types.hpp"

namespace hogl {

// Minimization target  f(g) = 0.5 |g|^2 - b'g + sum_j lambda_j |g_(j)|
// where g_(j) is the prefix made of blocks 1..j. Block sizes give the
// nested-group structure; all-ones block sizes recover the scalar case.
struct ProxProblem {
    Vector b;                     // stacked blocks, total size m
    Vector lambda;                // one non-negative penalty per level, size q
    std::vector<int> block_sizes; // q positive block sizes summing to m

    int levels() const { return static_cast<int>(lambda.size()); }
    int total_size() const { return static_cast<int>(b.size()); }
};

// Result of the single-pass threshold scan: alpha_star in 1..q+1 and the
// surviving row of the d table (d[j-1] = d_{alpha_star, j} for j >= alpha_star,
// zero before). alpha_star == q+1 means the all-zero vector is optimal.
struct DScan {
    int alpha_star = 1;
    Vector d;
};

// d values this small are treated as exact zeros so the hinge test and the
// resulting zero pattern stay deterministic.
inline constexpr double kDClamp = 1e-15;

double evaluate_objective(const Vector& gamma, const ProxProblem& prob);

// Single left-to-right pass computing one d value per column (O(q) work);
// jumps the candidate row past every column whose value hits zero.
DScan search_alpha_star(const ProxProblem& prob);

// Closed-form global minimizer: zero blocks before alpha_star, then each
// remaining block is b_j scaled by the telescoping product of
// d/(d + lambda) factors over the suffix.
Vector prox_solve(const ProxProblem& prob);

struct KktReport {
    bool ok = false;
    double residual = 0.0;
};

// Checks 0 in the subdifferential of f at gamma: exact stationarity on the
// blocks past the leading zeros plus feasibility of the subgradient
// inclusion on the zero prefix. Independent of the scan used by prox_solve.
KktReport verify_kkt(const Vector& gamma, const ProxProblem& prob, double tol);

// Full q x q table of d_{alpha, j} values (zero below the diagonal). O(q^2);
// used by the exhaustive alpha_star search and by diagnostics.
Matrix d_table(const ProxProblem& prob);

// First row of the table whose suffix is entirely positive, q+1 if none.
int alpha_star_from_table(const Matrix& table);

namespace detail {

// Scan on raw arrays; block_norms has one entry per level. Returns
// alpha_star and fills d_out (size q) with the surviving row.
int scan_alpha_star(const double* block_norms, const double* lambda, int q, double* d_out);

// Shrinkage factors for blocks alpha_star..q given the surviving d row;
// factors[j-1] = prod_{l=j..q} d_l / (d_l + lambda_l).
void shrink_factors(const double* d, const double* lambda, int q, int alpha_star,
                    double* factors);

}  // namespace detail

}  // namespace hogl
