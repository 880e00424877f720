#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dvlab/rng.hpp"

namespace dvlab {

/// Orthonormal n x k frame; its column span is a point of the Grassmannian
/// G(n, k). Storage is column-major.
class SubspaceBasis {
public:
  /// Orthonormalizes the given n x k column-major matrix. Throws UsageError
  /// if the columns are numerically rank deficient.
  static SubspaceBasis from_columns(std::size_t n, std::size_t k, std::vector<double> columns);
  /// span(e_{i0}, e_{i1}, ...) with the given 0-based coordinate indices.
  static SubspaceBasis coordinate(std::size_t n, std::span<const std::size_t> indices);

  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  std::span<const double> column(std::size_t j) const { return {data_.data() + j * n_, n_}; }
  double at(std::size_t row, std::size_t col) const { return data_[col * n_ + row]; }
  std::span<const double> data() const { return data_; }

  /// Largest |<v_i, v_j> - delta_ij|.
  double orthonormality_error() const;

private:
  SubspaceBasis(std::size_t n, std::size_t k, std::vector<double> data)
      : n_(n), k_(k), data_(std::move(data)) {}

  friend SubspaceBasis haar_basis(std::size_t, std::size_t, RngStream &);

  std::size_t n_;
  std::size_t k_;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double euclidean_norm(std::span<const double> x);

/// Uniform point on S^{n-1}: a normalized standard Gaussian vector.
std::vector<double> sphere_uniform(std::size_t n, RngStream &rng);
/// Same, written into `out` (size n) without allocating.
void sphere_uniform_into(std::span<double> out, RngStream &rng);

/// Haar-random k-dimensional subspace of R^n: a Gaussian n x k matrix
/// orthonormalized by Gram-Schmidt with one re-orthogonalization pass.
SubspaceBasis haar_basis(std::size_t n, std::size_t k, RngStream &rng);

/// |P_V x|, computed as the norm of the coordinate vector V^T x.
double proj_norm(const SubspaceBasis &basis, std::span<const double> x);
/// V^T x.
std::vector<double> proj_coords(const SubspaceBasis &basis, std::span<const double> x);

/// V y, the embedding of section coordinates into R^n.
std::vector<double> apply_basis(const SubspaceBasis &basis, std::span<const double> y);
void apply_basis_into(const SubspaceBasis &basis, std::span<const double> y, std::span<double> out);

} // namespace dvlab
