#include "robin/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace robin {

namespace {

void require_same_segment(const BoundaryField& a, const BoundaryField& b, const char* what) {
  if (a.segment != b.segment || a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": boundary fields live on different segments");
  }
}

void require_on_mesh(const Mesh& mesh, const BoundaryField& f, const char* what) {
  if (f.size() != mesh.segment(f.segment).size()) {
    std::ostringstream msg;
    msg << what << ": field has " << f.size() << " values, segment " << to_string(f.segment)
        << " has " << mesh.segment(f.segment).size() << " nodes";
    throw std::invalid_argument(msg.str());
  }
}

// Two-point Gauss on [0, 1].
constexpr double kGaussLo = 0.21132486540518711775;  // (1 - 1/sqrt(3)) / 2
constexpr double kGaussHi = 0.78867513459481288225;

double segment_edge_length(const Mesh& mesh, const BoundarySegment& seg, std::size_t e) {
  const Point& a = mesh.nodes()[seg.nodes[seg.edges[e][0]]];
  const Point& b = mesh.nodes()[seg.nodes[seg.edges[e][1]]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

SparseMatrix embed_matrix(const Mesh& mesh, const BoundarySegment& seg, const SparseMatrix& local) {
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(local.nonzeros());
  for (std::size_t i = 0; i < local.dim(); ++i) {
    for (std::size_t k = local.row_ptr()[i]; k < local.row_ptr()[i + 1]; ++k) {
      t.push_back({seg.nodes[i], seg.nodes[local.col_idx()[k]], local.values()[k]});
    }
  }
  return SparseMatrix::from_triplets(mesh.num_nodes(), std::move(t));
}

}  // namespace

BoundaryField operator+(const BoundaryField& a, const BoundaryField& b) {
  require_same_segment(a, b, "operator+");
  BoundaryField r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

BoundaryField operator-(const BoundaryField& a, const BoundaryField& b) {
  require_same_segment(a, b, "operator-");
  BoundaryField r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

BoundaryField operator*(double s, const BoundaryField& a) {
  BoundaryField r = a;
  for (double& v : r.values) v *= s;
  return r;
}

BoundaryField hadamard(const BoundaryField& a, const BoundaryField& b) {
  require_same_segment(a, b, "hadamard");
  BoundaryField r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] *= b[i];
  return r;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// ---------------------------------------------------------------------------
// SparseMatrix

SparseMatrix SparseMatrix::from_triplets(std::size_t dim, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= dim || t.col >= dim) throw std::out_of_range("SparseMatrix: index out of range");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.dim_ = dim;
  m.row_ptr_.assign(dim + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const std::size_t r = triplets[k].row;
    const std::size_t c = triplets[k].col;
    double v = 0.0;
    for (; k < triplets.size() && triplets[k].row == r && triplets[k].col == c; ++k) {
      v += triplets[k].value;
    }
    m.col_idx_.push_back(c);
    m.values_.push_back(v);
    ++m.row_ptr_[r + 1];
  }
  std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t dim) {
  std::vector<Triplet> t;
  t.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) t.push_back({i, i, 1.0});
  return from_triplets(dim, std::move(t));
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != dim_ || y.size() != dim_) {
    throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(dim_);
  multiply(x, y);
  return y;
}

double SparseMatrix::coeff(std::size_t i, std::size_t j) const {
  const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_.at(i));
  const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_.at(i + 1));
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) d[i] = coeff(i, i);
  return d;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::max_asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      m = std::max(m, std::abs(values_[k] - coeff(col_idx_[k], i)));
    }
  }
  return m;
}

SparseMatrix& SparseMatrix::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.dim_ != b.dim_) throw std::invalid_argument("SparseMatrix: dimension mismatch in +");
  SparseMatrix m;
  m.dim_ = a.dim_;
  m.row_ptr_.assign(a.dim_ + 1, 0);
  m.col_idx_.reserve(std::max(a.nonzeros(), b.nonzeros()));
  m.values_.reserve(std::max(a.nonzeros(), b.nonzeros()));
  for (std::size_t i = 0; i < a.dim_; ++i) {
    std::size_t ka = a.row_ptr_[i];
    std::size_t kb = b.row_ptr_[i];
    const std::size_t ea = a.row_ptr_[i + 1];
    const std::size_t eb = b.row_ptr_[i + 1];
    while (ka < ea || kb < eb) {
      if (kb == eb || (ka < ea && a.col_idx_[ka] < b.col_idx_[kb])) {
        m.col_idx_.push_back(a.col_idx_[ka]);
        m.values_.push_back(a.values_[ka++]);
      } else if (ka == ea || b.col_idx_[kb] < a.col_idx_[ka]) {
        m.col_idx_.push_back(b.col_idx_[kb]);
        m.values_.push_back(b.values_[kb++]);
      } else {
        m.col_idx_.push_back(a.col_idx_[ka]);
        m.values_.push_back(a.values_[ka++] + b.values_[kb++]);
      }
    }
    m.row_ptr_[i + 1] = m.col_idx_.size();
  }
  return m;
}

SparseMatrix operator*(double s, SparseMatrix a) {
  a *= s;
  return a;
}

// ---------------------------------------------------------------------------
// Conjugate gradients

std::vector<double> solve_spd(const SparseMatrix& a, std::span<const double> b,
                              const SolverOptions& opts, SolveStats* stats,
                              std::span<const double> initial_guess) {
  const std::size_t n = a.dim();
  if (b.size() != n) throw std::invalid_argument("solve_spd: right-hand side has wrong length");
  if (!(opts.tolerance > 0.0 && opts.tolerance < 1.0)) {
    throw std::invalid_argument("solve_spd: tolerance must lie in (0, 1)");
  }
  const std::size_t cap = opts.max_iterations == 0 ? 10 * n : opts.max_iterations;

  std::vector<double> x(n, 0.0);
  if (!initial_guess.empty()) {
    if (initial_guess.size() != n) throw std::invalid_argument("solve_spd: guess has wrong length");
    std::copy(initial_guess.begin(), initial_guess.end(), x.begin());
  }

  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    if (stats) *stats = {0, 0.0};
    return x;
  }

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) {
    if (!(d > 0.0)) throw SolverError("solve_spd: non-positive diagonal entry, matrix is not SPD");
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  a.multiply(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];

  const double target = opts.tolerance * bnorm;
  double rnorm = norm2(r);
  std::size_t it = 0;
  if (rnorm > target) {
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (true) {
      if (it == cap) {
        std::ostringstream msg;
        msg << "solve_spd: no convergence after " << it
            << " iterations (relative residual " << rnorm / bnorm << ")";
        throw SolverError(msg.str());
      }
      ++it;
      a.multiply(p, q);
      const double curvature = dot(p, q);
      if (!(curvature > 0.0)) {
        std::ostringstream msg;
        msg << "solve_spd: breakdown, non-positive curvature " << curvature << " at iteration "
            << it;
        throw SolverError(msg.str());
      }
      const double alpha = rz / curvature;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      rnorm = norm2(r);
      if (rnorm <= target) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
  }
  if (stats) *stats = {it, rnorm / bnorm};
  return x;
}

NodalField solve_spd(const SparseMatrix& a, const NodalField& b, const SolverOptions& opts,
                     SolveStats* stats) {
  return NodalField(solve_spd(a, std::span<const double>(b.values), opts, stats));
}

// ---------------------------------------------------------------------------
// Assembly

SparseMatrix assemble_stiffness(const Mesh& mesh, const Coefficient& a) {
  const auto& nodes = mesh.nodes();
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(9 * mesh.triangles().size());
  for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
    const auto& tri = mesh.triangles()[e];
    const Point& p0 = nodes[tri[0]];
    const Point& p1 = nodes[tri[1]];
    const Point& p2 = nodes[tri[2]];
    const double area = mesh.triangle_area(e);
    const double ac = a((p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0);
    if (!(ac > 0.0)) throw std::invalid_argument("assemble_stiffness: coefficient must be positive");

    const std::array<double, 3> bx = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const std::array<double, 3> cy = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        t.push_back({tri[i], tri[j], ac * (bx[i] * bx[j] + cy[i] * cy[j]) / (4.0 * area)});
      }
    }
  }
  return SparseMatrix::from_triplets(mesh.num_nodes(), std::move(t));
}

SparseMatrix assemble_mass(const Mesh& mesh, const Coefficient& c) {
  const auto& nodes = mesh.nodes();
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(9 * mesh.triangles().size());
  for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
    const auto& tri = mesh.triangles()[e];
    const double area = mesh.triangle_area(e);
    // cm[k] samples c at the midpoint of the edge opposite vertex k.
    std::array<double, 3> cm{};
    for (int k = 0; k < 3; ++k) {
      const Point& a = nodes[tri[(k + 1) % 3]];
      const Point& b = nodes[tri[(k + 2) % 3]];
      cm[k] = c(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
      if (cm[k] < 0.0) throw std::invalid_argument("assemble_mass: coefficient must be non-negative");
    }
    const double w = area / 12.0;
    for (int i = 0; i < 3; ++i) {
      // vertex i sees the two edges not opposite to it
      t.push_back({tri[i], tri[i], w * (cm[(i + 1) % 3] + cm[(i + 2) % 3])});
      for (int j = 0; j < 3; ++j) {
        if (j == i) continue;
        const int opposite = 3 - i - j;
        t.push_back({tri[i], tri[j], w * cm[opposite]});
      }
    }
  }
  return SparseMatrix::from_triplets(mesh.num_nodes(), std::move(t));
}

SparseMatrix segment_mass(const Mesh& mesh, const BoundaryField& weight) {
  require_on_mesh(mesh, weight, "segment_mass");
  const BoundarySegment& seg = mesh.segment(weight.segment);
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(4 * seg.edges.size());
  for (std::size_t e = 0; e < seg.edges.size(); ++e) {
    const auto [k0, k1] = seg.edges[e];
    const double h = segment_edge_length(mesh, seg, e);
    double m00 = 0.0, m01 = 0.0, m11 = 0.0;
    for (double s : {kGaussLo, kGaussHi}) {
      const double n0 = 1.0 - s;
      const double n1 = s;
      const double w = 0.5 * h * (weight[k0] * n0 + weight[k1] * n1);
      m00 += w * n0 * n0;
      m01 += w * n0 * n1;
      m11 += w * n1 * n1;
    }
    t.push_back({k0, k0, m00});
    t.push_back({k0, k1, m01});
    t.push_back({k1, k0, m01});
    t.push_back({k1, k1, m11});
  }
  return SparseMatrix::from_triplets(seg.size(), std::move(t));
}

SparseMatrix segment_mass(const Mesh& mesh, Segment segment, double weight) {
  const BoundarySegment& seg = mesh.segment(segment);
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(4 * seg.edges.size());
  for (std::size_t e = 0; e < seg.edges.size(); ++e) {
    const auto [k0, k1] = seg.edges[e];
    const double h = segment_edge_length(mesh, seg, e);
    t.push_back({k0, k0, weight * h / 3.0});
    t.push_back({k0, k1, weight * h / 6.0});
    t.push_back({k1, k0, weight * h / 6.0});
    t.push_back({k1, k1, weight * h / 3.0});
  }
  return SparseMatrix::from_triplets(seg.size(), std::move(t));
}

SparseMatrix assemble_boundary_mass(const Mesh& mesh, const BoundaryField& weight) {
  return embed_matrix(mesh, mesh.segment(weight.segment), segment_mass(mesh, weight));
}

SparseMatrix assemble_boundary_mass(const Mesh& mesh, Segment segment, double weight) {
  return embed_matrix(mesh, mesh.segment(segment), segment_mass(mesh, segment, weight));
}

NodalField assemble_load(const Mesh& mesh, const SpatialFunction& f) {
  const auto& nodes = mesh.nodes();
  NodalField load(mesh.num_nodes());
  for (std::size_t e = 0; e < mesh.triangles().size(); ++e) {
    const auto& tri = mesh.triangles()[e];
    const double area = mesh.triangle_area(e);
    std::array<double, 3> fm{};
    for (int k = 0; k < 3; ++k) {
      const Point& a = nodes[tri[(k + 1) % 3]];
      const Point& b = nodes[tri[(k + 2) % 3]];
      fm[k] = f(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
    }
    for (int i = 0; i < 3; ++i) {
      load[tri[i]] += area / 6.0 * (fm[(i + 1) % 3] + fm[(i + 2) % 3]);
    }
  }
  return load;
}

NodalField assemble_boundary_load(const Mesh& mesh, Segment segment, const SpatialFunction& g) {
  const BoundarySegment& seg = mesh.segment(segment);
  NodalField load(mesh.num_nodes());
  for (std::size_t e = 0; e < seg.edges.size(); ++e) {
    const auto [k0, k1] = seg.edges[e];
    const Point& a = mesh.nodes()[seg.nodes[k0]];
    const Point& b = mesh.nodes()[seg.nodes[k1]];
    const double h = segment_edge_length(mesh, seg, e);
    for (double s : {kGaussLo, kGaussHi}) {
      const double gv = g(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y));
      load[seg.nodes[k0]] += 0.5 * h * gv * (1.0 - s);
      load[seg.nodes[k1]] += 0.5 * h * gv * s;
    }
  }
  return load;
}

NodalField assemble_boundary_load(const Mesh& mesh, const BoundaryField& g) {
  require_on_mesh(mesh, g, "assemble_boundary_load");
  const SparseMatrix m = segment_mass(mesh, g.segment);
  BoundaryField local(g.segment, m * std::span<const double>(g.values));
  return embed(mesh, local);
}

// ---------------------------------------------------------------------------
// Boundary fields

BoundaryField trace(const Mesh& mesh, const NodalField& u, Segment segment) {
  if (u.size() != mesh.num_nodes()) throw std::invalid_argument("trace: nodal field has wrong length");
  const BoundarySegment& seg = mesh.segment(segment);
  BoundaryField r(segment, seg.size());
  for (std::size_t k = 0; k < seg.size(); ++k) r[k] = u[seg.nodes[k]];
  return r;
}

NodalField embed(const Mesh& mesh, const BoundaryField& v) {
  require_on_mesh(mesh, v, "embed");
  const BoundarySegment& seg = mesh.segment(v.segment);
  NodalField r(mesh.num_nodes());
  for (std::size_t k = 0; k < seg.size(); ++k) r[seg.nodes[k]] += v[k];
  return r;
}

BoundaryField interpolate(const Mesh& mesh, Segment segment, const SpatialFunction& fn) {
  const BoundarySegment& seg = mesh.segment(segment);
  BoundaryField r(segment, seg.size());
  for (std::size_t k = 0; k < seg.size(); ++k) {
    const Point& p = mesh.nodes()[seg.nodes[k]];
    r[k] = fn(p.x, p.y);
  }
  return r;
}

NodalField interpolate(const Mesh& mesh, const SpatialFunction& fn) {
  NodalField r(mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) r[i] = fn(mesh.nodes()[i].x, mesh.nodes()[i].y);
  return r;
}

double boundary_inner(const Mesh& mesh, const BoundaryField& u, const BoundaryField& v) {
  require_same_segment(u, v, "boundary_inner");
  require_on_mesh(mesh, u, "boundary_inner");
  const BoundarySegment& seg = mesh.segment(u.segment);
  double s = 0.0;
  for (std::size_t e = 0; e < seg.edges.size(); ++e) {
    const auto [k0, k1] = seg.edges[e];
    const double h = segment_edge_length(mesh, seg, e);
    s += h / 6.0 * (2.0 * u[k0] * v[k0] + u[k0] * v[k1] + u[k1] * v[k0] + 2.0 * u[k1] * v[k1]);
  }
  return s;
}

double boundary_norm(const Mesh& mesh, const BoundaryField& u) {
  return std::sqrt(std::max(0.0, boundary_inner(mesh, u, u)));
}

double weighted_boundary_inner(const Mesh& mesh, const BoundaryField& w, const BoundaryField& u,
                               const BoundaryField& v) {
  require_same_segment(u, v, "weighted_boundary_inner");
  require_same_segment(w, u, "weighted_boundary_inner");
  require_on_mesh(mesh, u, "weighted_boundary_inner");
  const BoundarySegment& seg = mesh.segment(u.segment);
  double s = 0.0;
  for (std::size_t e = 0; e < seg.edges.size(); ++e) {
    const auto [k0, k1] = seg.edges[e];
    const double h = segment_edge_length(mesh, seg, e);
    for (double q : {kGaussLo, kGaussHi}) {
      const double wq = w[k0] * (1.0 - q) + w[k1] * q;
      const double uq = u[k0] * (1.0 - q) + u[k1] * q;
      const double vq = v[k0] * (1.0 - q) + v[k1] * q;
      s += 0.5 * h * wq * uq * vq;
    }
  }
  return s;
}

BoundaryField solve_segment_mass(const Mesh& mesh, const BoundaryField& rhs) {
  require_on_mesh(mesh, rhs, "solve_segment_mass");
  const BoundarySegment& seg = mesh.segment(rhs.segment);
  const std::size_t n = seg.size();
  // Segment polylines join consecutive local indices, so M is tridiagonal.
  std::vector<double> diag(n, 0.0), off(n > 0 ? n - 1 : 0, 0.0);
  for (std::size_t e = 0; e < seg.edges.size(); ++e) {
    const auto [k0, k1] = seg.edges[e];
    const double h = segment_edge_length(mesh, seg, e);
    diag[k0] += h / 3.0;
    diag[k1] += h / 3.0;
    off[std::min(k0, k1)] += h / 6.0;
  }
  // Thomas algorithm; M is strictly diagonally dominant.
  std::vector<double> c(n, 0.0), d(rhs.values);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = diag[i];
    if (i > 0) {
      denom -= off[i - 1] * c[i - 1];
      d[i] -= off[i - 1] * d[i - 1];
    }
    if (i + 1 < n) c[i] = off[i] / denom;
    d[i] /= denom;
  }
  for (std::size_t i = n; i-- > 1;) d[i - 1] -= c[i - 1] * d[i];
  return BoundaryField(rhs.segment, std::move(d));
}

BoundaryField project_product(const Mesh& mesh, const BoundaryField& a, const BoundaryField& b) {
  require_same_segment(a, b, "project_product");
  const SparseMatrix m = segment_mass(mesh, a);
  BoundaryField rhs(a.segment, m * std::span<const double>(b.values));
  return solve_segment_mass(mesh, rhs);
}

}  // namespace robin
