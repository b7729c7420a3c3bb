#pragma once

#include <utility>
#include <vector>

#include "hogl/types.hpp"

namespace hogl {

struct TimeGrid {
    Vector t;
};

// Level structure of a basis: block_sizes[j] columns form penalty level j.
// Polynomial bases have one column per level; the Fourier basis pairs the
// cos/sin columns of each frequency and keeps a single constant level.
struct BasisSpec {
    enum class Kind { polynomial, fourier };
    Kind kind = Kind::polynomial;
    int levels = 0;
    std::vector<int> block_sizes;

    int total_size() const {
        int m = 0;
        for (int b : block_sizes) m += b;
        return m;
    }
};

BasisSpec polynomial_spec(int q);

// p equally spaced points with t_1 = -1 and t_p = 1.
TimeGrid uniform_time_points(int p);

// p x q matrix with column j holding the monomial of degree q-1-j scaled to
// unit Euclidean norm; the last column is the constant p^{-1/2}.
Matrix polynomial_basis(const TimeGrid& grid, int q);

// Columns cos((q-1)t), sin((q-1)t), ..., cos(t), sin(t), 1, each scaled to
// unit norm; 2q-1 columns grouped into q levels of sizes (2, ..., 2, 1).
std::pair<Matrix, BasisSpec> fourier_basis(const TimeGrid& grid, int q);

}  // namespace hogl
