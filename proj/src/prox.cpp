#include "hogl/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hogl/errors.hpp"

namespace hogl {

namespace {

void check_problem(const ProxProblem& prob) {
    const int q = prob.levels();
    if (q == 0 || static_cast<int>(prob.block_sizes.size()) != q) {
        throw DimensionMismatch("prox: lambda and block_sizes disagree");
    }
    int m = 0;
    for (int s : prob.block_sizes) {
        if (s <= 0) throw DimensionMismatch("prox: block sizes must be positive");
        m += s;
    }
    if (m != prob.total_size()) throw DimensionMismatch("prox: b does not match block sizes");
    for (int j = 0; j < q; ++j) {
        if (prob.lambda[j] < 0.0) throw DimensionMismatch("prox: negative penalty");
    }
}

void block_norms(const Vector& v, const std::vector<int>& sizes, double* out) {
    int offset = 0;
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        out[j] = v.segment(offset, sizes[j]).norm();
        offset += sizes[j];
    }
}

double hinge_d(double cumulative, double lambda) {
    double d = cumulative - lambda;
    if (d < kDClamp) d = 0.0;
    return d;
}

}  // namespace

namespace detail {

int scan_alpha_star(const double* bn, const double* lambda, int q, double* d_out) {
    int alpha = 1;
    double prev = 0.0;
    for (int j = 1; j <= q; ++j) {
        const double cumulative = (j == alpha) ? bn[j - 1] : std::sqrt(prev * prev + bn[j - 1] * bn[j - 1]);
        const double d = hinge_d(cumulative, lambda[j - 1]);
        d_out[j - 1] = d;
        if (d == 0.0) {
            alpha = j + 1;
            prev = 0.0;
        } else {
            prev = d;
        }
    }
    for (int j = 0; j < alpha - 1 && j < q; ++j) d_out[j] = 0.0;
    return alpha;
}

void shrink_factors(const double* d, const double* lambda, int q, int alpha_star,
                    double* factors) {
    double acc = 1.0;
    for (int j = q; j >= alpha_star; --j) {
        acc *= d[j - 1] / (d[j - 1] + lambda[j - 1]);
        factors[j - 1] = acc;
    }
}

}  // namespace detail

double evaluate_objective(const Vector& gamma, const ProxProblem& prob) {
    check_problem(prob);
    if (gamma.size() != prob.b.size()) throw DimensionMismatch("evaluate_objective: gamma size");
    double value = 0.5 * gamma.squaredNorm() - prob.b.dot(gamma);
    double prefix_sq = 0.0;
    int offset = 0;
    for (int j = 0; j < prob.levels(); ++j) {
        prefix_sq += gamma.segment(offset, prob.block_sizes[j]).squaredNorm();
        offset += prob.block_sizes[j];
        value += prob.lambda[j] * std::sqrt(prefix_sq);
    }
    return value;
}

DScan search_alpha_star(const ProxProblem& prob) {
    check_problem(prob);
    const int q = prob.levels();
    std::vector<double> bn(q);
    block_norms(prob.b, prob.block_sizes, bn.data());
    DScan scan;
    scan.d = Vector::Zero(q);
    scan.alpha_star = detail::scan_alpha_star(bn.data(), prob.lambda.data(), q, scan.d.data());
    for (int j = scan.alpha_star; j <= q; ++j) {
        if (scan.d[j - 1] <= 0.0) {
            throw Error("search_alpha_star: zero d inside the surviving row");
        }
    }
    return scan;
}

Vector prox_solve(const ProxProblem& prob) {
    const DScan scan = search_alpha_star(prob);
    const int q = prob.levels();
    Vector gamma = Vector::Zero(prob.total_size());
    if (scan.alpha_star > q) return gamma;  // all-zero optimum, bit-exact zeros

    std::vector<double> factors(q, 0.0);
    detail::shrink_factors(scan.d.data(), prob.lambda.data(), q, scan.alpha_star, factors.data());

    int offset = 0;
    for (int j = 1; j <= q; ++j) {
        const int size = prob.block_sizes[j - 1];
        if (j >= scan.alpha_star) {
            gamma.segment(offset, size) = factors[j - 1] * prob.b.segment(offset, size);
        }
        offset += size;
    }
    return gamma;
}

Matrix d_table(const ProxProblem& prob) {
    check_problem(prob);
    const int q = prob.levels();
    std::vector<double> bn(q);
    block_norms(prob.b, prob.block_sizes, bn.data());
    Matrix table = Matrix::Zero(q, q);
    for (int alpha = 1; alpha <= q; ++alpha) {
        double prev = 0.0;
        for (int j = alpha; j <= q; ++j) {
            const double cumulative = (j == alpha) ? bn[j - 1] : std::sqrt(prev * prev + bn[j - 1] * bn[j - 1]);
            const double d = hinge_d(cumulative, prob.lambda[j - 1]);
            table(alpha - 1, j - 1) = d;
            prev = d;
        }
    }
    return table;
}

int alpha_star_from_table(const Matrix& table) {
    const int q = static_cast<int>(table.rows());
    for (int alpha = 1; alpha <= q; ++alpha) {
        bool all_positive = true;
        for (int j = alpha; j <= q; ++j) {
            if (table(alpha - 1, j - 1) <= 0.0) {
                all_positive = false;
                break;
            }
        }
        if (all_positive) return alpha;
    }
    return q + 1;
}

KktReport verify_kkt(const Vector& gamma, const ProxProblem& prob, double tol) {
    check_problem(prob);
    if (gamma.size() != prob.b.size()) throw DimensionMismatch("verify_kkt: gamma size");
    const int q = prob.levels();

    // leading exactly-zero blocks
    int zero_prefix = 0;
    {
        int offset = 0;
        for (int j = 0; j < q; ++j) {
            if ((gamma.segment(offset, prob.block_sizes[j]).array() == 0.0).all()) {
                ++zero_prefix;
                offset += prob.block_sizes[j];
            } else {
                break;
            }
        }
    }

    double residual = 0.0;

    // Smooth stationarity on blocks past the prefix: every prefix norm from
    // there on is positive, so f is differentiable in those coordinates.
    if (zero_prefix < q) {
        std::vector<double> prefix_norm(q, 0.0);
        double acc = 0.0;
        int offset = 0;
        for (int j = 0; j < q; ++j) {
            acc += gamma.segment(offset, prob.block_sizes[j]).squaredNorm();
            offset += prob.block_sizes[j];
            prefix_norm[j] = std::sqrt(acc);
        }
        double weight_suffix = 0.0;
        std::vector<double> factor(q, 0.0);
        for (int j = q; j >= zero_prefix + 1; --j) {
            weight_suffix += prob.lambda[j - 1] / prefix_norm[j - 1];
            factor[j - 1] = 1.0 + weight_suffix;
        }
        offset = 0;
        for (int j = 1; j <= q; ++j) {
            const int size = prob.block_sizes[j - 1];
            if (j > zero_prefix) {
                const double local = (factor[j - 1] * gamma.segment(offset, size) -
                                      prob.b.segment(offset, size))
                                         .cwiseAbs()
                                         .maxCoeff();
                residual = std::max(residual, local);
            }
            offset += size;
        }
    }

    // Zero prefix: the inclusion 0 in the subdifferential restricted to the
    // prefix holds iff no row of the prefix d table is entirely positive.
    if (zero_prefix > 0) {
        std::vector<double> bn(zero_prefix);
        {
            int offset = 0;
            for (int j = 0; j < zero_prefix; ++j) {
                bn[j] = prob.b.segment(offset, prob.block_sizes[j]).norm();
                offset += prob.block_sizes[j];
            }
        }
        for (int alpha = 1; alpha <= zero_prefix; ++alpha) {
            double prev = 0.0;
            double row_min = std::numeric_limits<double>::infinity();
            for (int j = alpha; j <= zero_prefix; ++j) {
                const double cumulative = (j == alpha) ? bn[j - 1] : std::sqrt(prev * prev + bn[j - 1] * bn[j - 1]);
                const double d = hinge_d(cumulative, prob.lambda[j - 1]);
                row_min = std::min(row_min, d);
                if (d == 0.0) break;
                prev = d;
            }
            residual = std::max(residual, row_min);
        }
    }

    return {residual <= tol, residual};
}

}  // namespace hogl
