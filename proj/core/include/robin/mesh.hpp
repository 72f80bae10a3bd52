#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace robin {

using NodeId = std::size_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Which part of the boundary an edge lies on. The Robin coefficient lives on
/// the inaccessible segment; measurements are taken on the accessible one.
enum class Segment : std::uint8_t { Inaccessible = 0, Accessible = 1 };

const char* to_string(Segment s);

struct BoundaryEdge {
  std::array<NodeId, 2> nodes{};
  Segment tag = Segment::Accessible;
};

/// Ordered node set of one boundary segment. `nodes` follows the segment as a
/// polyline, so local index i and i+1 are joined by an edge; `edges` holds
/// pairs of local indices.
struct BoundarySegment {
  Segment tag = Segment::Accessible;
  std::vector<NodeId> nodes;
  std::vector<std::array<std::size_t, 2>> edges;

  std::size_t size() const { return nodes.size(); }
};

/// Structured triangulation of the rectangle (0,lx)x(0,ly).
///
/// Nodes are numbered lexicographically, row by row: node (i, j) at
/// x = i*lx/nx, y = j*ly/ny has id j*(nx+1) + i. Every cell is split along its
/// lower-left to upper-right diagonal into two counterclockwise triangles.
/// The mesh is immutable after construction.
class Mesh {
 public:
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<std::array<NodeId, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  std::size_t num_nodes() const { return nodes_.size(); }
  NodeId node_id(std::size_t i, std::size_t j) const { return j * (nx_ + 1) + i; }

  /// Valid only after classify_boundary (build_rect_mesh does it).
  const BoundarySegment& segment(Segment s) const {
    return s == Segment::Inaccessible ? inaccessible_ : accessible_;
  }

  double triangle_area(std::size_t t) const;
  double edge_length(const BoundaryEdge& e) const;

 private:
  friend Mesh build_rect_mesh(std::size_t, std::size_t, double, double);
  friend Mesh classify_boundary(Mesh);

  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  double lx_ = 0.0;
  double ly_ = 0.0;
  std::vector<Point> nodes_;
  std::vector<std::array<NodeId, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  BoundarySegment inaccessible_;
  BoundarySegment accessible_;
};

/// Builds and classifies the structured mesh. Throws std::invalid_argument on
/// zero counts or non-positive lengths.
Mesh build_rect_mesh(std::size_t nx, std::size_t ny, double lx, double ly);

/// Tags edges on x = lx as Inaccessible and all others as Accessible, and
/// rebuilds the per-segment node polylines. The accessible polyline runs
/// (lx,0) -> (0,0) -> (0,ly) -> (lx,ly); the inaccessible one runs upward.
Mesh classify_boundary(Mesh mesh);

/// Plain-text dump: `id x y` per node, `id n0 n1 n2` per triangle and
/// `n0 n1 tag` per boundary edge, each block preceded by a header line.
void write_mesh(std::ostream& out, const Mesh& mesh);

}  // namespace robin
