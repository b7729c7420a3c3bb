#pragma once

#include "hogl/types.hpp"

namespace hogl {

struct CenteredColumns {
    Matrix m;       // centered, unit-norm columns
    Vector means;   // per-column mean removed
    Vector scales;  // per-column Euclidean norm after centering
};

// Centers every column to zero mean and scales it to unit Euclidean norm.
// The original column j is scales[j] * m.col(j) + means[j] * ones.
CenteredColumns center_and_normalize_columns(const Matrix& input);

// Symmetric inverse square root of an SPD matrix via eigendecomposition:
// returns W with W * s * W = I and W = W'.
Matrix sym_inverse_sqrt(const Matrix& s);

// Maximum eigenvalue of kron(ga, gv) for symmetric PSD factors, computed as
// the product of the factor maxima.
double max_eigenvalue_kron(const Matrix& ga, const Matrix& gv);

// QR decomposition of the column-reversed input, mapped back so that
// v = h * q with h'h = I and q lower triangular. Column signs are fixed by
// requiring a positive diagonal in the underlying QR factor, which makes the
// decomposition unique.
struct FlippedQr {
    Matrix h;  // p x q, orthonormal columns
    Matrix q;  // q x q, lower triangular (strict upper part exactly zero)
};

FlippedQr flipped_qr(const Matrix& v);

}  // namespace hogl
