#include "hogl/basis.hpp"

#include <cmath>

#include "hogl/errors.hpp"

namespace hogl {

namespace {

void check_full_rank(const Matrix& x, const char* what) {
    Eigen::JacobiSVD<Matrix> svd(x);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-10 * sv(0)) {
        throw RankDeficient(std::string(what) + ": basis columns are linearly dependent");
    }
}

}  // namespace

BasisSpec polynomial_spec(int q) {
    BasisSpec spec;
    spec.kind = BasisSpec::Kind::polynomial;
    spec.levels = q;
    spec.block_sizes.assign(static_cast<std::size_t>(q), 1);
    return spec;
}

TimeGrid uniform_time_points(int p) {
    if (p < 2) throw InvalidDimension("uniform_time_points: need p >= 2");
    TimeGrid grid;
    grid.t.resize(p);
    for (int j = 0; j < p; ++j) {
        grid.t[j] = 2.0 * j / (p - 1) - 1.0;
    }
    return grid;
}

Matrix polynomial_basis(const TimeGrid& grid, int q) {
    const Index p = grid.t.size();
    if (q < 1) throw InvalidDimension("polynomial_basis: need q >= 1");
    if (q > p) throw InvalidDimension("polynomial_basis: need q <= p");

    Matrix x(p, q);
    for (int col = 0; col < q; ++col) {
        const int degree = q - 1 - col;
        x.col(col) = grid.t.array().pow(degree);
        const double norm = x.col(col).norm();
        if (norm <= 0.0) throw RankDeficient("polynomial_basis: zero column");
        x.col(col) /= norm;  // c_j = (sum t^{2j})^{-1/2}
    }
    check_full_rank(x, "polynomial_basis");
    return x;
}

std::pair<Matrix, BasisSpec> fourier_basis(const TimeGrid& grid, int q) {
    const Index p = grid.t.size();
    if (q < 2) throw InvalidDimension("fourier_basis: need q >= 2");
    const int cols = 2 * q - 1;
    if (cols > p) throw InvalidDimension("fourier_basis: need 2q-1 <= p");

    Matrix x(p, cols);
    int col = 0;
    for (int j = 1; j < q; ++j) {
        const double freq = q - j;
        x.col(col++) = (freq * grid.t.array()).cos();
        x.col(col++) = (freq * grid.t.array()).sin();
    }
    x.col(col) = Vector::Ones(p);

    for (int c = 0; c < cols; ++c) {
        const double norm = x.col(c).norm();
        if (norm <= 1e-10 * std::sqrt(static_cast<double>(p))) {
            throw RankDeficient("fourier_basis: degenerate column on this grid");
        }
        x.col(c) /= norm;
    }
    check_full_rank(x, "fourier_basis");

    BasisSpec spec;
    spec.kind = BasisSpec::Kind::fourier;
    spec.levels = q;
    spec.block_sizes.assign(static_cast<std::size_t>(q), 2);
    spec.block_sizes.back() = 1;
    return {x, spec};
}

}  // namespace hogl
