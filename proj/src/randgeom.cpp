#include "dvlab/randgeom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dvlab/errors.hpp"

namespace dvlab {

namespace {

// A column whose residual after projection is below this fraction of its
// original length is treated as linearly dependent (condition ~1e12).
constexpr double kRankTolerance = 1e-12;

// Orthonormalizes columns in place (CGS with a second pass). Returns false
// on numerical rank deficiency.
bool orthonormalize(std::size_t n, std::size_t k, std::vector<double> &a) {
  std::vector<double> coeff(k);
  for (std::size_t j = 0; j < k; ++j) {
    double *v = a.data() + j * n;
    const double original = euclidean_norm({v, n});
    if (!(original > 0.0) || !std::isfinite(original)) {
      return false;
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        coeff[i] = dot({a.data() + i * n, n}, {v, n});
      }
      for (std::size_t i = 0; i < j; ++i) {
        const double *q = a.data() + i * n;
        for (std::size_t r = 0; r < n; ++r) {
          v[r] -= coeff[i] * q[r];
        }
      }
    }
    const double len = euclidean_norm({v, n});
    if (!(len > kRankTolerance * original)) {
      return false;
    }
    for (std::size_t r = 0; r < n; ++r) {
      v[r] /= len;
    }
  }
  return true;
}

void check_dims(std::size_t got, std::size_t want, const char *what) {
  if (got != want) {
    throw UsageError(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                     ", expected " + std::to_string(want) + ")");
  }
}

} // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += a[i] * b[i];
  }
  return s;
}

double euclidean_norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

SubspaceBasis SubspaceBasis::from_columns(std::size_t n, std::size_t k, std::vector<double> columns) {
  if (k == 0 || k > n) {
    throw UsageError("subspace dimension must satisfy 1 <= k <= n");
  }
  check_dims(columns.size(), n * k, "SubspaceBasis::from_columns");
  if (!orthonormalize(n, k, columns)) {
    throw UsageError("SubspaceBasis::from_columns: columns are linearly dependent");
  }
  return {n, k, std::move(columns)};
}

SubspaceBasis SubspaceBasis::coordinate(std::size_t n, std::span<const std::size_t> indices) {
  std::vector<double> cols(n * indices.size(), 0.0);
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= n) {
      throw UsageError("SubspaceBasis::coordinate: index out of range");
    }
    cols[j * n + indices[j]] = 1.0;
  }
  return from_columns(n, indices.size(), std::move(cols));
}

double SubspaceBasis::orthonormality_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < k_; ++i) {
    for (std::size_t j = i; j < k_; ++j) {
      const double g = dot(column(i), column(j)) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

void sphere_uniform_into(std::span<double> out, RngStream &rng) {
  if (out.empty()) {
    throw UsageError("sphere_uniform: n must be positive");
  }
  for (;;) {
    for (double &v : out) {
      v = rng.gaussian();
    }
    const double len = euclidean_norm(out);
    if (len > 0.0 && std::isfinite(len)) {
      for (double &v : out) {
        v /= len;
      }
      return;
    }
  }
}

std::vector<double> sphere_uniform(std::size_t n, RngStream &rng) {
  std::vector<double> x(n);
  sphere_uniform_into(x, rng);
  return x;
}

SubspaceBasis haar_basis(std::size_t n, std::size_t k, RngStream &rng) {
  if (k == 0 || k > n) {
    throw UsageError("haar_basis: need 1 <= k <= n");
  }
  std::vector<double> a(n * k);
  for (;;) {
    for (double &v : a) {
      v = rng.gaussian();
    }
    if (orthonormalize(n, k, a)) {
      return {n, k, std::move(a)};
    }
  }
}

double proj_norm(const SubspaceBasis &basis, std::span<const double> x) {
  check_dims(x.size(), basis.n(), "proj_norm");
  if (basis.k() == basis.n()) {
    // P_V is the identity.
    return euclidean_norm(x);
  }
  double s = 0.0;
  for (std::size_t j = 0; j < basis.k(); ++j) {
    const double c = dot(basis.column(j), x);
    s += c * c;
  }
  return std::sqrt(s);
}

std::vector<double> proj_coords(const SubspaceBasis &basis, std::span<const double> x) {
  check_dims(x.size(), basis.n(), "proj_coords");
  std::vector<double> y(basis.k());
  for (std::size_t j = 0; j < basis.k(); ++j) {
    y[j] = dot(basis.column(j), x);
  }
  return y;
}

void apply_basis_into(const SubspaceBasis &basis, std::span<const double> y, std::span<double> out) {
  check_dims(y.size(), basis.k(), "apply_basis");
  check_dims(out.size(), basis.n(), "apply_basis output");
  const std::size_t n = basis.n();
  const double *v = basis.data().data();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double c = y[j];
    const double *col = v + j * n;
    for (std::size_t r = 0; r < n; ++r) {
      out[r] += c * col[r];
    }
  }
}

std::vector<double> apply_basis(const SubspaceBasis &basis, std::span<const double> y) {
  std::vector<double> x(basis.n());
  apply_basis_into(basis, y, x);
  return x;
}

} // namespace dvlab
