#pragma once

#include <cstddef>

#include "ridge/linalg.hpp"

// Deterministic spectral decomposition of small symmetric matrices (cyclic
// Jacobi, intended for d <= 8) plus the subspace helpers the ridge algorithms
// are built on: the split into the leading s directions and the trailing
// d - s directions, and a projector-based distance between such splits.

namespace ridge {

struct SpectralDecomposition {
    Vec eigenvalues; // descending
    Mat vectors;     // column j pairs with eigenvalues[j]; orthonormal
};

// Decompose a symmetric matrix. The input is symmetrized as (M + M^T)/2;
// relative asymmetry beyond 1e-10 or non-finite entries raise input_error,
// as does d > 8 (the cyclic Jacobi here is not meant for large matrices).
// Ordering is deterministic: eigenvalues descend; each vector's first
// non-negligible component is made positive; numerically tied eigenvalue
// blocks are ordered lexicographically by vector.
SpectralDecomposition spectral(const Mat& m);

// lambda_s - lambda_{s+1} for 1-based s in [1, d).
double eigengap(const SpectralDecomposition& dec, std::size_t s);

// The trailing d - s eigenvectors (columns s..d-1 of the sorted basis),
// for s in [0, d).
Mat v_perp(const SpectralDecomposition& dec, std::size_t s);

// Projector onto the span of the trailing d - s eigenvectors.
Mat perp_projector(const SpectralDecomposition& dec, std::size_t s);

// Frobenius distance between the trailing-subspace projectors of two
// decompositions with a common split index s.
double subspace_distance(const SpectralDecomposition& a,
                         const SpectralDecomposition& b, std::size_t s);

} // namespace ridge
