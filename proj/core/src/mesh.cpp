#include "robin/mesh.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace robin {

const char* to_string(Segment s) {
  return s == Segment::Inaccessible ? "inaccessible" : "accessible";
}

double Mesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles_.at(t);
  const Point& a = nodes_[tri[0]];
  const Point& b = nodes_[tri[1]];
  const Point& c = nodes_[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double Mesh::edge_length(const BoundaryEdge& e) const {
  const Point& a = nodes_.at(e.nodes[0]);
  const Point& b = nodes_.at(e.nodes[1]);
  return std::hypot(b.x - a.x, b.y - a.y);
}

Mesh build_rect_mesh(std::size_t nx, std::size_t ny, double lx, double ly) {
  if (nx == 0 || ny == 0) {
    throw std::invalid_argument("build_rect_mesh: cell counts must be positive");
  }
  if (!(lx > 0.0) || !(ly > 0.0)) {
    throw std::invalid_argument("build_rect_mesh: side lengths must be positive");
  }

  Mesh m;
  m.nx_ = nx;
  m.ny_ = ny;
  m.lx_ = lx;
  m.ly_ = ly;

  m.nodes_.reserve((nx + 1) * (ny + 1));
  for (std::size_t j = 0; j <= ny; ++j) {
    // Exact end coordinates so boundary membership tests are exact.
    const double y = (j == ny) ? ly : ly * static_cast<double>(j) / static_cast<double>(ny);
    for (std::size_t i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? lx : lx * static_cast<double>(i) / static_cast<double>(nx);
      m.nodes_.push_back({x, y});
    }
  }

  m.triangles_.reserve(2 * nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const NodeId ll = m.node_id(i, j);
      const NodeId lr = m.node_id(i + 1, j);
      const NodeId ul = m.node_id(i, j + 1);
      const NodeId ur = m.node_id(i + 1, j + 1);
      m.triangles_.push_back({ll, lr, ur});
      m.triangles_.push_back({ll, ur, ul});
    }
  }

  m.boundary_edges_.reserve(2 * (nx + ny));
  for (std::size_t i = 0; i < nx; ++i) {
    m.boundary_edges_.push_back({{m.node_id(i, 0), m.node_id(i + 1, 0)}, Segment::Accessible});
  }
  for (std::size_t j = 0; j < ny; ++j) {
    m.boundary_edges_.push_back({{m.node_id(nx, j), m.node_id(nx, j + 1)}, Segment::Accessible});
  }
  for (std::size_t i = nx; i > 0; --i) {
    m.boundary_edges_.push_back({{m.node_id(i, ny), m.node_id(i - 1, ny)}, Segment::Accessible});
  }
  for (std::size_t j = ny; j > 0; --j) {
    m.boundary_edges_.push_back({{m.node_id(0, j), m.node_id(0, j - 1)}, Segment::Accessible});
  }

  return classify_boundary(std::move(m));
}

Mesh classify_boundary(Mesh mesh) {
  const double lx = mesh.lx_;
  for (auto& e : mesh.boundary_edges_) {
    const bool on_right =
        mesh.nodes_[e.nodes[0]].x == lx && mesh.nodes_[e.nodes[1]].x == lx;
    e.tag = on_right ? Segment::Inaccessible : Segment::Accessible;
  }

  const std::size_t nx = mesh.nx_;
  const std::size_t ny = mesh.ny_;

  BoundarySegment gi;
  gi.tag = Segment::Inaccessible;
  for (std::size_t j = 0; j <= ny; ++j) gi.nodes.push_back(mesh.node_id(nx, j));

  BoundarySegment ga;
  ga.tag = Segment::Accessible;
  for (std::size_t i = nx + 1; i-- > 0;) ga.nodes.push_back(mesh.node_id(i, 0));
  for (std::size_t j = 1; j <= ny; ++j) ga.nodes.push_back(mesh.node_id(0, j));
  for (std::size_t i = 1; i <= nx; ++i) ga.nodes.push_back(mesh.node_id(i, ny));

  for (auto* s : {&gi, &ga}) {
    for (std::size_t k = 0; k + 1 < s->nodes.size(); ++k) s->edges.push_back({k, k + 1});
  }

  mesh.inaccessible_ = std::move(gi);
  mesh.accessible_ = std::move(ga);
  return mesh;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  out << "nodes " << mesh.num_nodes() << '\n';
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    out << i << ' ' << mesh.nodes()[i].x << ' ' << mesh.nodes()[i].y << '\n';
  }
  out << "triangles " << mesh.triangles().size() << '\n';
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto& tri = mesh.triangles()[t];
    out << t << ' ' << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  }
  out << "boundary_edges " << mesh.boundary_edges().size() << '\n';
  for (const auto& e : mesh.boundary_edges()) {
    out << e.nodes[0] << ' ' << e.nodes[1] << ' ' << to_string(e.tag) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace robin
