#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dvlab/randgeom.hpp"

namespace dvlab {

/// The Euclidean unit ball B_2^n.
struct Euclidean {
  std::size_t n;
};

/// Unit ball of l_p^n, 1 <= p <= inf. p = inf is a distinguished value and
/// every evaluation branches on it explicitly.
struct LpBall {
  std::size_t n;
  double p;

  static LpBall infinity(std::size_t n);
  bool is_infinite() const;
};

/// {x : |<a_i, x>| <= 1 for all i}, gauge max_i |<a_i, x>|. When the
/// functionals do not span R^n the gauge is only a seminorm (the body is an
/// unbounded slab or cylinder); such polytopes are representable but
/// rejected wherever a norm is required.
class SymPolytope {
public:
  /// rows: m functionals, each of length n.
  SymPolytope(std::size_t n, const std::vector<std::vector<double>> &rows, std::string source = {});

  /// Loads functionals from a CSV file: one functional per row, n columns,
  /// no header.
  static SymPolytope from_csv(const std::string &path);
  /// The slab {|x_1| <= 1/b}, gauge b|x_1|.
  static SymPolytope slab(std::size_t n, double b);
  /// l_inf^n written as the polytope with functionals e_1..e_n.
  static SymPolytope cube(std::size_t n);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::span<const double> functional(std::size_t i) const { return {a_.data() + i * n_, n_}; }
  bool is_norm() const { return is_norm_; }
  const std::string &source() const { return source_; }

  /// Same body with every functional multiplied by lambda > 0.
  SymPolytope scaled(double lambda) const;

private:
  std::size_t n_;
  std::size_t m_;
  std::vector<double> a_;
  bool is_norm_;
  std::string source_;
};

/// conv(B_2^n, R e_1)°, gauge max(|x|, R |x_1|).
struct PolarHull {
  std::size_t n;
  double R;
};

using BodySpec = std::variant<Euclidean, LpBall, SymPolytope, PolarHull>;

std::size_t dimension(const BodySpec &body);
bool is_norm(const BodySpec &body);
/// Throws UnsupportedBody unless the body is a norm.
void require_norm(const BodySpec &body, const char *context);

/// Minkowski functional ||x||_K.
double gauge_eval(const BodySpec &body, std::span<const double> x);

/// sup of the gauge over the Euclidean unit sphere.
double b_exact(const BodySpec &body);

/// A unit vector where the gauge attains b_exact.
std::vector<double> max_direction(const BodySpec &body);

/// Gauge of K ∩ F at the point with section coordinates y, i.e.
/// gauge_eval(body, V y). `scratch` must have size n.
double gauge_on_section(const BodySpec &body, const SubspaceBasis &basis, std::span<const double> y,
                        std::span<double> scratch);
double gauge_on_section(const BodySpec &body, const SubspaceBasis &basis, std::span<const double> y);

/// Parses `euclidean:n=20`, `lp:n=20,p=1`, `lp:n=20,p=inf`,
/// `polarhull:n=256,R=4`, `polytope:file=<path>`.
BodySpec parse_body(std::string_view text);
/// Canonical text form (inverse of parse_body for file-backed polytopes and
/// every other variant).
std::string body_to_text(const BodySpec &body);

} // namespace dvlab
