#pragma once

#include <vector>

#include "relaudit/matrix.hpp"

namespace relaudit {

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues come back ascending; eigenvectors are the orthonormal columns
/// of `vectors`, paired by position, with the sign convention that the first
/// component of magnitude > 1e-12 of each vector is positive.
/// Throws if the input is not symmetric within 1e-10 * max|a_ij|.
void symmetric_eigen(const Matrix& a, std::vector<double>& values, Matrix& vectors);

}  // namespace relaudit
