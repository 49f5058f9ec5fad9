#ifndef EITLAB_MESH_HPP
#define EITLAB_MESH_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace eitlab {

using Point = Eigen::Vector2d;
using Triangle = std::array<int, 3>;
using SparseMatrix = Eigen::SparseMatrix<double>;

enum class DomainTag { disk, square };

const char* to_string(DomainTag tag);

/// Boundary edge (a -> b, counterclockwise) with the boundary parameter
/// interval [s0, s1] it covers. The parameter runs over [0, 2*pi).
struct BoundaryEdge {
    int a = 0;
    int b = 0;
    double s0 = 0.0;
    double s1 = 0.0;
};

/// Conforming P1 triangulation of a planar domain. Immutable once built.
///
/// Boundary edges form one counterclockwise cycle; boundary_edges()[i].a is
/// boundary_vertices()[i]. The boundary parameter is polygon arc length
/// rescaled to [0, 2*pi); for the refined disk it coincides with the polar
/// angle of the boundary vertices.
class Mesh {
public:
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
         std::vector<BoundaryEdge> boundary_edges, DomainTag tag);

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const noexcept { return boundary_edges_; }
    const std::vector<int>& boundary_vertices() const noexcept { return boundary_vertices_; }

    DomainTag tag() const noexcept { return tag_; }
    /// Maximum triangle diameter.
    double h() const noexcept { return h_; }
    std::size_t num_vertices() const noexcept { return vertices_.size(); }
    std::size_t num_triangles() const noexcept { return triangles_.size(); }
    std::size_t num_boundary_vertices() const noexcept { return boundary_vertices_.size(); }

    /// Position of a vertex in the boundary cycle, or -1 for interior vertices.
    int boundary_index(int vertex) const { return boundary_index_[static_cast<std::size_t>(vertex)]; }
    bool is_boundary(int vertex) const { return boundary_index(vertex) >= 0; }

    double area(std::size_t t) const { return areas_[t]; }
    Point centroid(std::size_t t) const;
    double total_area() const;
    /// Physical length of the boundary polygon.
    double boundary_length() const noexcept { return boundary_length_; }

    /// Identity shared by copies; used to catch mixing data from different meshes.
    std::uint64_t id() const noexcept { return id_; }

private:
    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<int> boundary_vertices_;
    std::vector<int> boundary_index_;
    std::vector<double> areas_;
    DomainTag tag_;
    double h_ = 0.0;
    double boundary_length_ = 0.0;
    std::uint64_t id_ = 0;
};

/// Unit disk mesh: an 8-triangle fan from the origin refined `level` times by
/// edge bisection, new boundary midpoints projected onto the circle.
/// Throws CapacityError for level > 9.
Mesh generate_disk_mesh(int level);

/// Structured n x n mesh of the unit square with 2 n^2 triangles.
/// Throws InvalidArgument for n < 2.
Mesh generate_square_mesh(int n);

/// L2(boundary) mass matrix of the P1 hat-function traces (num_vertices square).
SparseMatrix boundary_mass_matrix(const Mesh& mesh);

/// Gradients of the three barycentric coordinates of triangle t (rows).
Eigen::Matrix<double, 3, 2> p1_gradients(const Mesh& mesh, std::size_t t);

/// Checks the structural invariants: positive areas, closed counterclockwise
/// boundary cycle, disk boundary on the unit circle, interior edges shared by
/// exactly two triangles. Returns an empty string when all hold, otherwise a
/// description of the first violation.
std::string check_mesh(const Mesh& mesh);

/// Smallest interior angle over all triangles, in degrees.
double min_interior_angle_deg(const Mesh& mesh);

/// Text dump: "V T B", V lines "x y", T lines "i j k", B lines "i j s0 s1".
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

/// Triangle lookup by uniform bucketing of triangle bounding boxes.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh);
    /// Triangle containing p; points outside the mesh map to the triangle
    /// with the nearest centroid.
    std::size_t locate(const Point& p) const;

private:
    const Mesh* mesh_;
    Eigen::Vector2d lo_;
    double cell_ = 1.0;
    int nx_ = 1;
    int ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

} // namespace eitlab

#endif
