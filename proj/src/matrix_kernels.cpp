#include "hogl/matrix_kernels.hpp"

#include <cmath>
#include <string>

#include "hogl/errors.hpp"

namespace hogl {

CenteredColumns center_and_normalize_columns(const Matrix& input) {
    const Index n = input.rows();
    const Index k = input.cols();
    if (n < 2) throw InvalidDimension("center_and_normalize_columns: need at least 2 rows");

    CenteredColumns out;
    out.m.resize(n, k);
    out.means.resize(k);
    out.scales.resize(k);
    for (Index j = 0; j < k; ++j) {
        const double mean = input.col(j).mean();
        Vector centered = input.col(j).array() - mean;
        const double norm = centered.norm();
        if (norm <= 1e-12 * std::sqrt(static_cast<double>(n)) * (1.0 + std::abs(mean))) {
            throw ZeroColumn("column " + std::to_string(j) + " is constant after centering");
        }
        out.m.col(j) = centered / norm;
        out.means[j] = mean;
        out.scales[j] = norm;
    }
    return out;
}

Matrix sym_inverse_sqrt(const Matrix& s) {
    if (s.rows() != s.cols()) throw DimensionMismatch("sym_inverse_sqrt: matrix not square");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    if (eig.info() != Eigen::Success) throw NotPositiveDefinite("sym_inverse_sqrt: eigensolver failed");
    const Vector& vals = eig.eigenvalues();
    const double max_eig = vals.maxCoeff();
    if (max_eig <= 0.0 || vals.minCoeff() <= 1e-12 * max_eig) {
        throw NotPositiveDefinite("sym_inverse_sqrt: matrix is not positive definite");
    }
    Matrix w = eig.eigenvectors() * vals.cwiseSqrt().cwiseInverse().asDiagonal() *
               eig.eigenvectors().transpose();
    // enforce exact symmetry against rounding in the triple product
    w = ((w + w.transpose()) * 0.5).eval();
    return w;
}

double max_eigenvalue_kron(const Matrix& ga, const Matrix& gv) {
    if (ga.rows() != ga.cols() || gv.rows() != gv.cols()) {
        throw DimensionMismatch("max_eigenvalue_kron: factors must be square");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> ea(ga, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Matrix> ev(gv, Eigen::EigenvaluesOnly);
    return ea.eigenvalues().maxCoeff() * ev.eigenvalues().maxCoeff();
}

FlippedQr flipped_qr(const Matrix& v) {
    const Index p = v.rows();
    const Index q = v.cols();
    if (p < q) throw InvalidDimension("flipped_qr: need rows >= cols");

    const Matrix flipped = v.rowwise().reverse();
    Eigen::HouseholderQR<Matrix> qr(flipped);
    Matrix h0 = qr.householderQ() * Matrix::Identity(p, q);
    Matrix r0 = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();

    double max_diag = 0.0;
    for (Index j = 0; j < q; ++j) max_diag = std::max(max_diag, std::abs(r0(j, j)));
    for (Index j = 0; j < q; ++j) {
        if (std::abs(r0(j, j)) <= 1e-10 * max_diag) {
            throw RankDeficient("flipped_qr: input is rank deficient");
        }
        if (r0(j, j) < 0.0) {  // positive-diagonal sign convention
            r0.row(j) = -r0.row(j);
            h0.col(j) = -h0.col(j);
        }
    }

    FlippedQr out;
    out.h = h0.rowwise().reverse();
    out.q = r0.reverse();  // reverse both rows and columns: upper -> lower triangular
    return out;
}

}  // namespace hogl
