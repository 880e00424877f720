#include "dvlab/gauges.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "dvlab/errors.hpp"

namespace dvlab {

namespace {

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_dim(std::size_t got, std::size_t want) {
  if (got != want) {
    throw UsageError("gauge: vector of length " + std::to_string(got) + " for a body in dimension " +
                     std::to_string(want));
  }
}

double lp_gauge(const LpBall &ball, std::span<const double> x) {
  if (ball.is_infinite()) {
    double m = 0.0;
    for (double v : x) {
      m = std::max(m, std::abs(v));
    }
    return m;
  }
  if (ball.p == 1.0) {
    double s = 0.0;
    for (double v : x) {
      s += std::abs(v);
    }
    return s;
  }
  if (ball.p == 2.0) {
    return euclidean_norm(x);
  }
  double m = 0.0;
  for (double v : x) {
    m = std::max(m, std::abs(v));
  }
  if (m == 0.0) {
    return 0.0;
  }
  double s = 0.0;
  for (double v : x) {
    s += std::pow(std::abs(v) / m, ball.p);
  }
  return m * std::pow(s, 1.0 / ball.p);
}

double polytope_gauge(const SymPolytope &poly, std::span<const double> x) {
  double g = 0.0;
  for (std::size_t i = 0; i < poly.m(); ++i) {
    g = std::max(g, std::abs(dot(poly.functional(i), x)));
  }
  return g;
}

std::size_t numeric_rank(std::size_t n, std::size_t m, std::vector<double> rows) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < m; ++i) {
    double *v = rows.data() + i * n;
    const double original = euclidean_norm({v, n});
    if (original == 0.0) {
      continue;
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t q : kept) {
        const double *u = rows.data() + q * n;
        const double c = dot({u, n}, {v, n});
        for (std::size_t r = 0; r < n; ++r) {
          v[r] -= c * u[r];
        }
      }
    }
    const double len = euclidean_norm({v, n});
    if (len > 1e-10 * original) {
      for (std::size_t r = 0; r < n; ++r) {
        v[r] /= len;
      }
      kept.push_back(i);
      if (kept.size() == n) {
        break;
      }
    }
  }
  return kept.size();
}

double parse_real(std::string_view key, std::string_view s) {
  if (s == "inf" || s == "infinity" || s == "Inf") {
    return std::numeric_limits<double>::infinity();
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError("body text: bad value for '" + std::string(key) + "': '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_dim(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0) {
    throw UsageError("body text: n must be a positive integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

} // namespace

LpBall LpBall::infinity(std::size_t n) { return {n, std::numeric_limits<double>::infinity()}; }

bool LpBall::is_infinite() const { return std::isinf(p); }

SymPolytope::SymPolytope(std::size_t n, const std::vector<std::vector<double>> &rows, std::string source)
    : n_(n), m_(rows.size()), source_(std::move(source)) {
  if (n == 0) {
    throw UsageError("polytope: n must be positive");
  }
  if (rows.empty()) {
    throw UsageError("polytope: at least one functional is required");
  }
  a_.reserve(n * m_);
  for (const auto &row : rows) {
    if (row.size() != n) {
      throw UsageError("polytope: functional of length " + std::to_string(row.size()) +
                       " in dimension " + std::to_string(n));
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw UsageError("polytope: non-finite functional entry");
      }
    }
    a_.insert(a_.end(), row.begin(), row.end());
  }
  is_norm_ = numeric_rank(n_, m_, a_) == n_;
}

SymPolytope SymPolytope::from_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("polytope: cannot open '" + path + "'");
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      if (b == std::string::npos) {
        throw UsageError("polytope: empty cell in '" + path + "'");
      }
      row.push_back(parse_real("functional", std::string_view(cell).substr(b, e - b + 1)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw UsageError("polytope: ragged rows in '" + path + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw UsageError("polytope: no functionals in '" + path + "'");
  }
  const std::size_t n = rows.front().size();
  return SymPolytope(n, rows, path);
}

SymPolytope SymPolytope::slab(std::size_t n, double b) {
  std::vector<double> row(n, 0.0);
  row.at(0) = b;
  return SymPolytope(n, {row});
}

SymPolytope SymPolytope::cube(std::size_t n) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    rows[i][i] = 1.0;
  }
  return SymPolytope(n, rows);
}

SymPolytope SymPolytope::scaled(double lambda) const {
  SymPolytope out = *this;
  out.source_.clear();
  for (double &v : out.a_) {
    v *= lambda;
  }
  return out;
}

std::size_t dimension(const BodySpec &body) {
  return std::visit(overloaded{[](const SymPolytope &p) { return p.n(); }, [](const auto &b) { return b.n; }},
                    body);
}

bool is_norm(const BodySpec &body) {
  if (const auto *p = std::get_if<SymPolytope>(&body)) {
    return p->is_norm();
  }
  return true;
}

void require_norm(const BodySpec &body, const char *context) {
  if (!is_norm(body)) {
    throw UnsupportedBody(std::string(context) + ": body is a seminorm (functionals do not span R^n)");
  }
}

double gauge_eval(const BodySpec &body, std::span<const double> x) {
  check_dim(x.size(), dimension(body));
  return std::visit(overloaded{
                        [&](const Euclidean &) { return euclidean_norm(x); },
                        [&](const LpBall &b) { return lp_gauge(b, x); },
                        [&](const SymPolytope &p) { return polytope_gauge(p, x); },
                        [&](const PolarHull &h) { return std::max(euclidean_norm(x), h.R * std::abs(x[0])); },
                    },
                    body);
}

double b_exact(const BodySpec &body) {
  require_norm(body, "b_exact");
  return std::visit(overloaded{
                        [](const Euclidean &) { return 1.0; },
                        [](const LpBall &b) {
                          if (b.is_infinite() || b.p >= 2.0) {
                            return 1.0;
                          }
                          return std::pow(static_cast<double>(b.n), 1.0 / b.p - 0.5);
                        },
                        [](const SymPolytope &p) {
                          double best = 0.0;
                          for (std::size_t i = 0; i < p.m(); ++i) {
                            best = std::max(best, euclidean_norm(p.functional(i)));
                          }
                          return best;
                        },
                        [](const PolarHull &h) { return std::max(1.0, h.R); },
                    },
                    body);
}

std::vector<double> max_direction(const BodySpec &body) {
  require_norm(body, "max_direction");
  const std::size_t n = dimension(body);
  std::vector<double> u(n, 0.0);
  std::visit(overloaded{
                 [&](const LpBall &b) {
                   if (!b.is_infinite() && b.p <= 2.0) {
                     std::fill(u.begin(), u.end(), 1.0 / std::sqrt(static_cast<double>(n)));
                   } else {
                     u[0] = 1.0;
                   }
                 },
                 [&](const SymPolytope &p) {
                   std::size_t best = 0;
                   double best_len = -1.0;
                   for (std::size_t i = 0; i < p.m(); ++i) {
                     const double len = euclidean_norm(p.functional(i));
                     if (len > best_len) {
                       best_len = len;
                       best = i;
                     }
                   }
                   const auto a = p.functional(best);
                   for (std::size_t r = 0; r < n; ++r) {
                     u[r] = a[r] / best_len;
                   }
                 },
                 [&](const auto &) { u[0] = 1.0; },
             },
             body);
  return u;
}

double gauge_on_section(const BodySpec &body, const SubspaceBasis &basis, std::span<const double> y,
                        std::span<double> scratch) {
  check_dim(basis.n(), dimension(body));
  apply_basis_into(basis, y, scratch);
  return gauge_eval(body, scratch);
}

double gauge_on_section(const BodySpec &body, const SubspaceBasis &basis, std::span<const double> y) {
  std::vector<double> x(basis.n());
  return gauge_on_section(body, basis, y, x);
}

BodySpec parse_body(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw UsageError("body text '" + std::string(text) + "': expected <kind>:<key>=<value>,...");
  }
  const std::string_view kind = text.substr(0, colon);
  std::map<std::string, std::string, std::less<>> kv;
  std::string_view rest = text.substr(colon + 1);
  if (kind == "polytope") {
    // The path may itself contain commas, so take everything after "file=".
    if (!rest.starts_with("file=") || rest.size() == 5) {
      throw UsageError("body text: polytope needs file=<path>");
    }
    return SymPolytope::from_csv(std::string(rest.substr(5)));
  }
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("body text: malformed item '" + std::string(item) + "'");
    }
    kv.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  auto need = [&](const char *key) -> const std::string & {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw UsageError("body text '" + std::string(text) + "': missing '" + key + "'");
    }
    return it->second;
  };
  auto expect_keys = [&](std::size_t count) {
    if (kv.size() != count) {
      throw UsageError("body text '" + std::string(text) + "': unexpected keys");
    }
  };

  const std::size_t n = parse_dim(need("n"));
  if (kind == "euclidean") {
    expect_keys(1);
    return Euclidean{n};
  }
  if (kind == "lp") {
    const double p = parse_real("p", need("p"));
    expect_keys(2);
    if (!(p >= 1.0)) {
      throw UsageError("body text: lp requires p >= 1");
    }
    return LpBall{n, p};
  }
  if (kind == "polarhull") {
    const double R = parse_real("R", need("R"));
    expect_keys(2);
    if (!(R >= 1.0) || !std::isfinite(R)) {
      throw UsageError("body text: polarhull requires finite R >= 1");
    }
    return PolarHull{n, R};
  }
  throw UsageError("body text: unknown body kind '" + std::string(kind) + "'");
}

std::string body_to_text(const BodySpec &body) {
  return std::visit(overloaded{
                        [](const Euclidean &e) { return "euclidean:n=" + std::to_string(e.n); },
                        [](const LpBall &b) {
                          return "lp:n=" + std::to_string(b.n) + ",p=" + (b.is_infinite() ? "inf" : format_real(b.p));
                        },
                        [](const SymPolytope &p) {
                          if (!p.source().empty()) {
                            return "polytope:file=" + p.source();
                          }
                          return "polytope:n=" + std::to_string(p.n()) + ",m=" + std::to_string(p.m());
                        },
                        [](const PolarHull &h) {
                          return "polarhull:n=" + std::to_string(h.n) + ",R=" + format_real(h.R);
                        },
                    },
                    body);
}

} // namespace dvlab
