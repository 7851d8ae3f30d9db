#pragma once

#include "tarnn/matrix.hpp"
#include "tarnn/rng.hpp"

namespace tarnn {

// Matrix with i.i.d. uniform(-scale, scale) entries.
DenseMatrix random_uniform_matrix(std::size_t rows, std::size_t cols,
                                  double scale, RngStream& rng);

// Largest eigenvalue modulus of a square matrix, by power iteration with a
// two-dimensional subspace fallback that resolves complex-conjugate
// dominant pairs. Throws std::invalid_argument for non-square input and
// std::runtime_error when the iteration cap is hit without convergence
// (degenerate spectrum).
double spectral_radius(const DenseMatrix& m);

// m * (target / spectral_radius(m)). Throws when the radius is zero.
DenseMatrix scale_to_radius(const DenseMatrix& m, double target);

// Minimizes ||W*states - targets||^2 + lambda*||W||^2 over W via the
// normal equations on the Gram matrix, Cholesky-factored with an LU
// fallback. states is [n_features x n_samples], targets is
// [n_out x n_samples]; the result is [n_out x n_features]. A singular
// system with lambda == 0 is reported as an error, never returned as NaN.
DenseMatrix ridge_solve(const DenseMatrix& states, const DenseMatrix& targets,
                        double lambda);

}  // namespace tarnn
