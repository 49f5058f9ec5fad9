#include "eitlab/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "eitlab/errors.hpp"

namespace eitlab {

namespace {

constexpr int kMaxDiskLevel = 9;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::atomic<std::uint64_t> g_next_mesh_id{1};

std::uint64_t edge_key(int a, int b)
{
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (hi << 32) | lo;
}

double signed_area(const Point& a, const Point& b, const Point& c)
{
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

double polar_angle(const Point& p)
{
    double t = std::atan2(p.y(), p.x());
    if (t < 0.0)
        t += kTwoPi;
    return t;
}

// Directed boundary edges (edges used by one triangle, oriented as in that
// triangle) chained into a counterclockwise cycle starting at `start`, with
// arc-length parameters rescaled to [0, 2*pi].
std::vector<BoundaryEdge> boundary_cycle(const std::vector<Point>& vertices,
                                         const std::vector<Triangle>& triangles,
                                         DomainTag tag)
{
    std::unordered_map<std::uint64_t, int> count;
    count.reserve(triangles.size() * 3);
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e)
            ++count[edge_key(t[e], t[(e + 1) % 3])];

    std::unordered_map<int, int> next;
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e) {
            const int a = t[e];
            const int b = t[(e + 1) % 3];
            if (count[edge_key(a, b)] == 1) {
                if (next.count(a))
                    throw InvalidArgument("boundary is not a simple cycle (vertex " +
                                          std::to_string(a) + " has two outgoing edges)");
                next[a] = b;
            }
        }
    if (next.empty())
        throw InvalidArgument("mesh has no boundary");

    int start = next.begin()->first;
    auto better = [&](int cand, int cur) {
        const Point& p = vertices[static_cast<std::size_t>(cand)];
        const Point& q = vertices[static_cast<std::size_t>(cur)];
        if (tag == DomainTag::disk)
            return polar_angle(p) < polar_angle(q);
        return std::make_pair(p.y(), p.x()) < std::make_pair(q.y(), q.x());
    };
    for (const auto& [v, w] : next) {
        (void)w;
        if (better(v, start))
            start = v;
    }

    std::vector<BoundaryEdge> edges;
    edges.reserve(next.size());
    std::vector<double> lengths;
    int v = start;
    do {
        auto it = next.find(v);
        if (it == next.end())
            throw InvalidArgument("boundary cycle is open at vertex " + std::to_string(v));
        edges.push_back({v, it->second, 0.0, 0.0});
        lengths.push_back((vertices[static_cast<std::size_t>(it->second)] -
                           vertices[static_cast<std::size_t>(v)]).norm());
        v = it->second;
        if (edges.size() > next.size())
            throw InvalidArgument("boundary cycle does not close");
    } while (v != start);
    if (edges.size() != next.size())
        throw InvalidArgument("boundary consists of more than one cycle");

    double total = 0.0;
    for (double l : lengths)
        total += l;
    double acc = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i].s0 = kTwoPi * acc / total;
        acc += lengths[i];
        edges[i].s1 = (i + 1 == edges.size()) ? kTwoPi : kTwoPi * acc / total;
    }
    return edges;
}

struct RawMesh {
    std::vector<Point> vertices;
    std::vector<Triangle> triangles;
};

RawMesh refine_uniform(const RawMesh& in, bool project_boundary)
{
    std::unordered_map<std::uint64_t, int> count;
    for (const auto& t : in.triangles)
        for (int e = 0; e < 3; ++e)
            ++count[edge_key(t[e], t[(e + 1) % 3])];

    RawMesh out;
    out.vertices = in.vertices;
    out.triangles.reserve(in.triangles.size() * 4);
    std::unordered_map<std::uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = edge_key(a, b);
        if (auto it = midpoint.find(key); it != midpoint.end())
            return it->second;
        Point p = 0.5 * (in.vertices[static_cast<std::size_t>(a)] +
                         in.vertices[static_cast<std::size_t>(b)]);
        if (project_boundary && count[key] == 1)
            p /= p.norm();
        out.vertices.push_back(p);
        const int idx = static_cast<int>(out.vertices.size()) - 1;
        midpoint.emplace(key, idx);
        return idx;
    };
    for (const auto& t : in.triangles) {
        const int ab = mid(t[0], t[1]);
        const int bc = mid(t[1], t[2]);
        const int ca = mid(t[2], t[0]);
        out.triangles.push_back({t[0], ab, ca});
        out.triangles.push_back({ab, t[1], bc});
        out.triangles.push_back({ca, bc, t[2]});
        out.triangles.push_back({ab, bc, ca});
    }
    return out;
}

} // namespace

const char* to_string(DomainTag tag)
{
    return tag == DomainTag::disk ? "disk" : "square";
}

Mesh::Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary_edges, DomainTag tag)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)), tag_(tag), id_(g_next_mesh_id++)
{
    const auto nv = vertices_.size();
    for (const auto& t : triangles_)
        for (int v : t)
            if (v < 0 || static_cast<std::size_t>(v) >= nv)
                throw InvalidArgument("triangle references vertex " + std::to_string(v) +
                                      " out of range");

    areas_.resize(triangles_.size());
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        const Point& a = vertices_[static_cast<std::size_t>(tri[0])];
        const Point& b = vertices_[static_cast<std::size_t>(tri[1])];
        const Point& c = vertices_[static_cast<std::size_t>(tri[2])];
        areas_[t] = signed_area(a, b, c);
        h_ = std::max({h_, (b - a).norm(), (c - b).norm(), (a - c).norm()});
    }

    boundary_index_.assign(nv, -1);
    boundary_vertices_.reserve(boundary_edges_.size());
    for (std::size_t i = 0; i < boundary_edges_.size(); ++i) {
        const auto& e = boundary_edges_[i];
        if (e.a < 0 || static_cast<std::size_t>(e.a) >= nv || e.b < 0 ||
            static_cast<std::size_t>(e.b) >= nv)
            throw InvalidArgument("boundary edge references vertex out of range");
        boundary_vertices_.push_back(e.a);
        boundary_index_[static_cast<std::size_t>(e.a)] = static_cast<int>(i);
        boundary_length_ += (vertices_[static_cast<std::size_t>(e.b)] -
                             vertices_[static_cast<std::size_t>(e.a)]).norm();
    }
}

Point Mesh::centroid(std::size_t t) const
{
    const auto& tri = triangles_[t];
    return (vertices_[static_cast<std::size_t>(tri[0])] + vertices_[static_cast<std::size_t>(tri[1])] +
            vertices_[static_cast<std::size_t>(tri[2])]) / 3.0;
}

double Mesh::total_area() const
{
    double s = 0.0;
    for (double a : areas_)
        s += a;
    return s;
}

Mesh generate_disk_mesh(int level)
{
    if (level < 0)
        throw InvalidArgument("refinement level must be nonnegative");
    if (level > kMaxDiskLevel)
        throw CapacityError("disk refinement level " + std::to_string(level) +
                            " exceeds the guard " + std::to_string(kMaxDiskLevel));

    constexpr int fan = 8;
    RawMesh raw;
    raw.vertices.emplace_back(0.0, 0.0);
    for (int i = 0; i < fan; ++i) {
        const double t = kTwoPi * i / fan;
        raw.vertices.emplace_back(std::cos(t), std::sin(t));
    }
    for (int i = 0; i < fan; ++i)
        raw.triangles.push_back({0, 1 + i, 1 + (i + 1) % fan});

    for (int l = 0; l < level; ++l)
        raw = refine_uniform(raw, true);

    auto edges = boundary_cycle(raw.vertices, raw.triangles, DomainTag::disk);
    return Mesh(std::move(raw.vertices), std::move(raw.triangles), std::move(edges),
                DomainTag::disk);
}

Mesh generate_square_mesh(int n)
{
    if (n < 2)
        throw InvalidArgument("square mesh needs n >= 2, got " + std::to_string(n));
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * n * n));
    auto idx = [n](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            triangles.push_back({idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)});
            triangles.push_back({idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)});
        }
    auto edges = boundary_cycle(vertices, triangles, DomainTag::square);
    return Mesh(std::move(vertices), std::move(triangles), std::move(edges), DomainTag::square);
}

SparseMatrix boundary_mass_matrix(const Mesh& mesh)
{
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.boundary_edges().size() * 4);
    for (const auto& e : mesh.boundary_edges()) {
        const double len = (mesh.vertices()[static_cast<std::size_t>(e.b)] -
                            mesh.vertices()[static_cast<std::size_t>(e.a)]).norm();
        trip.emplace_back(e.a, e.a, len / 3.0);
        trip.emplace_back(e.b, e.b, len / 3.0);
        trip.emplace_back(e.a, e.b, len / 6.0);
        trip.emplace_back(e.b, e.a, len / 6.0);
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    SparseMatrix m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

Eigen::Matrix<double, 3, 2> p1_gradients(const Mesh& mesh, std::size_t t)
{
    const auto& tri = mesh.triangles()[t];
    const Point& a = mesh.vertices()[static_cast<std::size_t>(tri[0])];
    const Point& b = mesh.vertices()[static_cast<std::size_t>(tri[1])];
    const Point& c = mesh.vertices()[static_cast<std::size_t>(tri[2])];
    const Eigen::Vector2d d1 = b - a;
    const Eigen::Vector2d d2 = c - a;
    const double det = d1.x() * d2.y() - d1.y() * d2.x();
    Eigen::Matrix<double, 3, 2> g;
    g.row(1) << d2.y() / det, -d2.x() / det;
    g.row(2) << -d1.y() / det, d1.x() / det;
    g.row(0) = -g.row(1) - g.row(2);
    return g;
}

std::string check_mesh(const Mesh& mesh)
{
    std::ostringstream msg;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
        if (!(mesh.area(t) > 0.0)) {
            msg << "triangle " << t << " has nonpositive signed area " << mesh.area(t);
            return msg.str();
        }

    std::unordered_map<std::uint64_t, int> count;
    for (const auto& t : mesh.triangles())
        for (int e = 0; e < 3; ++e)
            ++count[edge_key(t[e], t[(e + 1) % 3])];
    std::size_t n_boundary = 0;
    for (const auto& [key, c] : count) {
        if (c > 2) {
            msg << "edge shared by " << c << " triangles";
            return msg.str();
        }
        if (c == 1)
            ++n_boundary;
    }

    const auto& edges = mesh.boundary_edges();
    if (edges.size() != n_boundary) {
        msg << "boundary cycle has " << edges.size() << " edges but the triangulation has "
            << n_boundary << " unshared edges";
        return msg.str();
    }
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        const auto& f = edges[(i + 1) % edges.size()];
        if (count[edge_key(e.a, e.b)] != 1) {
            msg << "boundary edge " << i << " is interior";
            return msg.str();
        }
        if (e.b != f.a) {
            msg << "boundary cycle broken after edge " << i;
            return msg.str();
        }
        if (!(e.s1 > e.s0)) {
            msg << "boundary parameter not increasing on edge " << i;
            return msg.str();
        }
        if (i + 1 < edges.size() && e.s1 != f.s0) {
            msg << "boundary parameter discontinuous after edge " << i;
            return msg.str();
        }
    }
    if (edges.front().s0 != 0.0 || edges.back().s1 != kTwoPi)
        return "boundary parameter does not span [0, 2*pi]";

    double enclosed = 0.0;
    for (const auto& e : edges) {
        const Point& a = mesh.vertices()[static_cast<std::size_t>(e.a)];
        const Point& b = mesh.vertices()[static_cast<std::size_t>(e.b)];
        enclosed += 0.5 * (a.x() * b.y() - b.x() * a.y());
    }
    if (!(enclosed > 0.0))
        return "boundary cycle is not counterclockwise";

    if (mesh.tag() == DomainTag::disk)
        for (int v : mesh.boundary_vertices())
            if (std::abs(mesh.vertices()[static_cast<std::size_t>(v)].norm() - 1.0) > 1e-12) {
                msg << "boundary vertex " << v << " is off the unit circle";
                return msg.str();
            }
    return {};
}

double min_interior_angle_deg(const Mesh& mesh)
{
    double best = 180.0;
    for (const auto& t : mesh.triangles())
        for (int i = 0; i < 3; ++i) {
            const Point& p = mesh.vertices()[static_cast<std::size_t>(t[i])];
            const Eigen::Vector2d u = mesh.vertices()[static_cast<std::size_t>(t[(i + 1) % 3])] - p;
            const Eigen::Vector2d w = mesh.vertices()[static_cast<std::size_t>(t[(i + 2) % 3])] - p;
            const double c = std::clamp(u.dot(w) / (u.norm() * w.norm()), -1.0, 1.0);
            best = std::min(best, std::acos(c) * 180.0 / std::numbers::pi);
        }
    return best;
}

void write_mesh(std::ostream& os, const Mesh& mesh)
{
    char buf[128];
    os << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' '
       << mesh.boundary_edges().size() << '\n';
    for (const auto& p : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x(), p.y());
        os << buf;
    }
    for (const auto& t : mesh.triangles())
        os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    for (const auto& e : mesh.boundary_edges()) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", e.a, e.b, e.s0, e.s1);
        os << buf;
    }
}

Mesh read_mesh(std::istream& is)
{
    std::size_t nv = 0, nt = 0, nb = 0;
    if (!(is >> nv >> nt >> nb))
        throw InvalidArgument("mesh dump: malformed header");
    auto read_double = [&is]() {
        std::string tok;
        if (!(is >> tok))
            throw InvalidArgument("mesh dump: truncated");
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
            throw InvalidArgument("mesh dump: bad number '" + tok + "'");
        return v;
    };
    std::vector<Point> vertices(nv);
    for (auto& p : vertices) {
        p.x() = read_double();
        p.y() = read_double();
    }
    std::vector<Triangle> triangles(nt);
    for (auto& t : triangles)
        if (!(is >> t[0] >> t[1] >> t[2]))
            throw InvalidArgument("mesh dump: truncated triangle list");
    std::vector<BoundaryEdge> edges(nb);
    for (auto& e : edges) {
        if (!(is >> e.a >> e.b))
            throw InvalidArgument("mesh dump: truncated boundary list");
        e.s0 = read_double();
        e.s1 = read_double();
    }
    bool on_circle = nb > 0;
    for (const auto& e : edges)
        if (e.a < 0 || static_cast<std::size_t>(e.a) >= nv ||
            std::abs(vertices[static_cast<std::size_t>(e.a)].norm() - 1.0) > 1e-12)
            on_circle = false;
    Mesh mesh(std::move(vertices), std::move(triangles), std::move(edges),
              on_circle ? DomainTag::disk : DomainTag::square);
    if (auto err = check_mesh(mesh); !err.empty())
        throw InvalidArgument("mesh dump: " + err);
    return mesh;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh)
{
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::max());
    Eigen::Vector2d hi = -lo;
    for (const auto& p : mesh.vertices()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    lo_ = lo;
    cell_ = std::max(mesh.h(), 1e-12);
    nx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / cell_)) + 1);
    ny_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / cell_)) + 1);
    buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles()[t];
        Eigen::Vector2d tlo = mesh.vertices()[static_cast<std::size_t>(tri[0])];
        Eigen::Vector2d thi = tlo;
        for (int v : tri) {
            tlo = tlo.cwiseMin(mesh.vertices()[static_cast<std::size_t>(v)]);
            thi = thi.cwiseMax(mesh.vertices()[static_cast<std::size_t>(v)]);
        }
        const int i0 = static_cast<int>((tlo.x() - lo_.x()) / cell_);
        const int i1 = static_cast<int>((thi.x() - lo_.x()) / cell_);
        const int j0 = static_cast<int>((tlo.y() - lo_.y()) / cell_);
        const int j1 = static_cast<int>((thi.y() - lo_.y()) / cell_);
        for (int j = j0; j <= std::min(j1, ny_ - 1); ++j)
            for (int i = i0; i <= std::min(i1, nx_ - 1); ++i)
                buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
    }
}

std::size_t PointLocator::locate(const Point& p) const
{
    const int i = static_cast<int>(std::floor((p.x() - lo_.x()) / cell_));
    const int j = static_cast<int>(std::floor((p.y() - lo_.y()) / cell_));
    if (i >= 0 && i < nx_ && j >= 0 && j < ny_) {
        for (int t : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
            const auto& tri = mesh_->triangles()[static_cast<std::size_t>(t)];
            const Point& a = mesh_->vertices()[static_cast<std::size_t>(tri[0])];
            const Point& b = mesh_->vertices()[static_cast<std::size_t>(tri[1])];
            const Point& c = mesh_->vertices()[static_cast<std::size_t>(tri[2])];
            const double area = mesh_->area(static_cast<std::size_t>(t));
            const double tol = -1e-12 * area;
            if (signed_area(p, b, c) >= tol && signed_area(a, p, c) >= tol &&
                signed_area(a, b, p) >= tol)
                return static_cast<std::size_t>(t);
        }
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) {
        const double d = (mesh_->centroid(t) - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = t;
        }
    }
    return best;
}

} // namespace eitlab
