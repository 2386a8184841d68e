#include "pstokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace pstokes {

namespace {

struct FaceKey {
  std::array<int, 3> v;
  bool operator==(const FaceKey& o) const { return v == o.v; }
};

struct FaceKeyHash {
  size_t operator()(const FaceKey& k) const {
    size_t h = 1469598103934665603ull;
    for (int x : k.v) {
      h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return h;
  }
};

double tet_signed_volume(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                         const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

void fix_orientation(std::vector<Tetrahedron>& tets, const std::vector<Vertex>& verts) {
  for (auto& t : tets) {
    const double vol = tet_signed_volume(verts[t.v[0]].x, verts[t.v[1]].x,
                                         verts[t.v[2]].x, verts[t.v[3]].x);
    if (vol < 0.0) std::swap(t.v[2], t.v[3]);
  }
}

}  // namespace

StraightMesh::StraightMesh(std::vector<Vertex> vertices, std::vector<Tetrahedron> tets,
                           BoundaryGeometryDesc geometry)
    : vertices_(std::move(vertices)), tets_(std::move(tets)), geometry_(geometry) {
  for (size_t t = 0; t < tets_.size(); ++t) {
    for (int i = 0; i < 4; ++i) {
      const int v = tets_[t].v[i];
      if (v < 0 || v >= n_vertices())
        throw MeshError("tet " + std::to_string(t) + ": vertex index " +
                        std::to_string(v) + " out of range");
    }
  }
  build_topology();
}

void StraightMesh::build_topology() {
  std::unordered_map<FaceKey, int, FaceKeyHash> face_index;
  faces_.clear();
  tet_faces_.assign(tets_.size(), {-1, -1, -1, -1});

  for (int t = 0; t < n_tets(); ++t) {
    for (int l = 0; l < 4; ++l) {
      std::array<int, 3> fv;
      for (int i = 0; i < 3; ++i) fv[i] = tets_[t].v[kTetFaceVertices[l][i]];
      std::sort(fv.begin(), fv.end());
      auto it = face_index.find(FaceKey{fv});
      if (it == face_index.end()) {
        FaceRecord rec;
        rec.v = fv;
        rec.tet[0] = t;
        rec.local_face[0] = l;
        face_index.emplace(FaceKey{fv}, static_cast<int>(faces_.size()));
        tet_faces_[t][l] = static_cast<int>(faces_.size());
        faces_.push_back(rec);
      } else {
        FaceRecord& rec = faces_[it->second];
        if (rec.tet[1] != -1)
          throw MeshError("non-conforming mesh: face (" + std::to_string(fv[0]) + "," +
                          std::to_string(fv[1]) + "," + std::to_string(fv[2]) +
                          ") shared by more than two tets (tets " +
                          std::to_string(rec.tet[0]) + "," + std::to_string(rec.tet[1]) +
                          "," + std::to_string(t) + ")");
        rec.tet[1] = t;
        rec.local_face[1] = l;
        tet_faces_[t][l] = it->second;
      }
    }
  }

  n_boundary_faces_ = 0;
  for (auto& v : vertices_) v.on_boundary = false;
  boundary_edges_.clear();
  for (auto& f : faces_) {
    f.kind = (f.tet[1] == -1) ? FaceKind::Boundary : FaceKind::Interior;
    const Eigen::Vector3d& a = vertices_[f.v[0]].x;
    const Eigen::Vector3d& b = vertices_[f.v[1]].x;
    const Eigen::Vector3d& c = vertices_[f.v[2]].x;
    f.diameter = std::max({(a - b).norm(), (a - c).norm(), (b - c).norm()});
    if (f.kind == FaceKind::Boundary) {
      ++n_boundary_faces_;
      for (int i = 0; i < 3; ++i) {
        vertices_[f.v[i]].on_boundary = true;
        boundary_edges_.insert(edge_key(f.v[i], f.v[(i + 1) % 3]));
      }
    }
  }

  mesh_size_ = 0.0;
  min_tet_diameter_ = tets_.empty() ? 0.0 : std::numeric_limits<double>::max();
  for (int t = 0; t < n_tets(); ++t) {
    int nb = 0;
    for (int i = 0; i < 4; ++i)
      if (vertices_[tets_[t].v[i]].on_boundary) ++nb;
    tets_[t].boundary_vertex_count = nb;
    const double d = tet_diameter(t);
    mesh_size_ = std::max(mesh_size_, d);
    min_tet_diameter_ = std::min(min_tet_diameter_, d);
  }
}

double StraightMesh::signed_volume(int t) const {
  return tet_signed_volume(tet_point(t, 0), tet_point(t, 1), tet_point(t, 2),
                           tet_point(t, 3));
}

double StraightMesh::tet_diameter(int t) const {
  double d = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      d = std::max(d, (tet_point(t, i) - tet_point(t, j)).norm());
  return d;
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, const std::string& path) : in_(in), path_(path) {}

  // Next non-empty line; returns false at EOF.
  bool next(std::istringstream& line) {
    std::string s;
    while (std::getline(in_, s)) {
      ++lineno_;
      if (s.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      line.clear();
      line.str(s);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw MeshError(path_ + ":" + std::to_string(lineno_) + ": " + msg);
  }

  int lineno() const { return lineno_; }

 private:
  std::istream& in_;
  std::string path_;
  int lineno_ = 0;
};

StraightMesh load_native(std::istream& in, const std::string& path) {
  LineReader reader(in, path);
  std::istringstream line;

  if (!reader.next(line)) reader.fail("empty file");
  std::string tag;
  int version = 0;
  if (!(line >> tag >> version) || tag != "tetmesh" || version != 1)
    reader.fail("expected header 'tetmesh 1'");

  if (!reader.next(line)) reader.fail("expected 'vertices N'");
  int nv = 0;
  if (!(line >> tag >> nv) || tag != "vertices" || nv < 0)
    reader.fail("expected 'vertices N'");
  std::vector<Vertex> verts(nv);
  for (int i = 0; i < nv; ++i) {
    if (!reader.next(line)) reader.fail("unexpected EOF in vertex list");
    if (!(line >> verts[i].x[0] >> verts[i].x[1] >> verts[i].x[2]))
      reader.fail("malformed vertex line");
    if (!verts[i].x.allFinite()) reader.fail("non-finite vertex coordinates");
  }

  if (!reader.next(line)) reader.fail("expected 'tets M'");
  int nt = 0;
  if (!(line >> tag >> nt) || tag != "tets" || nt < 0) reader.fail("expected 'tets M'");
  std::vector<Tetrahedron> tets(nt);
  for (int i = 0; i < nt; ++i) {
    if (!reader.next(line)) reader.fail("unexpected EOF in tet list");
    if (!(line >> tets[i].v[0] >> tets[i].v[1] >> tets[i].v[2] >> tets[i].v[3]))
      reader.fail("malformed tet line");
    for (int k = 0; k < 4; ++k)
      if (tets[i].v[k] < 0 || tets[i].v[k] >= nv)
        reader.fail("tet " + std::to_string(i) + ": vertex index out of range");
  }

  BoundaryGeometryDesc geom;
  if (reader.next(line)) {
    if (!(line >> tag) || tag != "boundary_geometry")
      reader.fail("unexpected trailing content (expected 'boundary_geometry')");
    std::string kind;
    if (!(line >> kind >> geom.center[0] >> geom.center[1] >> geom.center[2] >>
          geom.radius))
      reader.fail("malformed boundary_geometry line");
    if (kind == "sphere")
      geom.kind = BoundaryGeometryKind::Sphere;
    else if (kind == "cube_minus_sphere")
      geom.kind = BoundaryGeometryKind::CubeMinusSphere;
    else
      reader.fail("unknown boundary_geometry kind '" + kind + "'");
  }

  StraightMesh mesh(std::move(verts), std::move(tets), geom);
  for (int t = 0; t < mesh.n_tets(); ++t) {
    const double vol = mesh.signed_volume(t);
    if (!(vol > 0.0))
      throw MeshError(path + ": tet " + std::to_string(t) +
                      " is inverted or degenerate (signed volume " +
                      std::to_string(vol) + ")");
  }
  return mesh;
}

StraightMesh load_gmsh_v2(std::istream& in, const std::string& path) {
  LineReader reader(in, path);
  std::istringstream line;
  std::unordered_map<long long, int> node_id;
  std::vector<Vertex> verts;
  std::vector<Tetrahedron> tets;
  bool saw_nodes = false, saw_elements = false;

  while (reader.next(line)) {
    std::string section;
    line >> section;
    if (section == "$MeshFormat") {
      if (!reader.next(line)) reader.fail("unexpected EOF in $MeshFormat");
      double ver = 0;
      int ftype = 0, dsize = 0;
      if (!(line >> ver >> ftype >> dsize) || ver < 2.0 || ver >= 3.0 || ftype != 0)
        reader.fail("unsupported MSH format (need ASCII v2.x)");
      if (!reader.next(line)) reader.fail("expected $EndMeshFormat");
    } else if (section == "$Nodes") {
      saw_nodes = true;
      if (!reader.next(line)) reader.fail("expected node count");
      long long n = 0;
      if (!(line >> n) || n < 0) reader.fail("malformed node count");
      verts.reserve(static_cast<size_t>(n));
      for (long long i = 0; i < n; ++i) {
        if (!reader.next(line)) reader.fail("unexpected EOF in $Nodes");
        long long id;
        Vertex v;
        if (!(line >> id >> v.x[0] >> v.x[1] >> v.x[2])) reader.fail("malformed node line");
        node_id[id] = static_cast<int>(verts.size());
        verts.push_back(v);
      }
      if (!reader.next(line)) reader.fail("expected $EndNodes");
    } else if (section == "$Elements") {
      saw_elements = true;
      if (!reader.next(line)) reader.fail("expected element count");
      long long n = 0;
      if (!(line >> n) || n < 0) reader.fail("malformed element count");
      for (long long i = 0; i < n; ++i) {
        if (!reader.next(line)) reader.fail("unexpected EOF in $Elements");
        long long id;
        int type = 0, ntags = 0;
        if (!(line >> id >> type >> ntags)) reader.fail("malformed element line");
        for (int k = 0; k < ntags; ++k) {
          int tag;
          if (!(line >> tag)) reader.fail("malformed element tags");
        }
        if (type == 4) {
          Tetrahedron t;
          for (int k = 0; k < 4; ++k) {
            long long nid;
            if (!(line >> nid)) reader.fail("malformed tetrahedron connectivity");
            auto it = node_id.find(nid);
            if (it == node_id.end()) reader.fail("unknown node id in tetrahedron");
            t.v[k] = it->second;
          }
          tets.push_back(t);
        } else if (type == 15 || type == 1 || type == 2) {
          continue;  // points, lines, boundary triangles: ignored
        } else {
          reader.fail("unsupported element type " + std::to_string(type) +
                      " (only 4-node tetrahedra)");
        }
      }
      if (!reader.next(line)) reader.fail("expected $EndElements");
    }
    // Other sections ($PhysicalNames etc.) are skipped line by line until the
    // next recognized section header; the loop above consumes one line per
    // iteration, which suffices for the supported subset.
  }
  if (!saw_nodes || !saw_elements)
    throw MeshError(path + ": missing $Nodes or $Elements section");
  if (tets.empty()) throw MeshError(path + ": no tetrahedra found");

  fix_orientation(tets, verts);
  return StraightMesh(std::move(verts), std::move(tets));
}

}  // namespace

StraightMesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file '" + path + "'");
  if (format == MeshFormat::Native) return load_native(in, path);
  return load_gmsh_v2(in, path);
}

void save_mesh(const StraightMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open '" + path + "' for writing");
  out.precision(17);
  out << "tetmesh 1\n";
  out << "vertices " << mesh.n_vertices() << "\n";
  for (const auto& v : mesh.vertices())
    out << v.x[0] << " " << v.x[1] << " " << v.x[2] << "\n";
  out << "tets " << mesh.n_tets() << "\n";
  for (const auto& t : mesh.tets())
    out << t.v[0] << " " << t.v[1] << " " << t.v[2] << " " << t.v[3] << "\n";
  const auto& g = mesh.geometry();
  if (g.kind == BoundaryGeometryKind::Sphere)
    out << "boundary_geometry sphere " << g.center[0] << " " << g.center[1] << " "
        << g.center[2] << " " << g.radius << "\n";
  else if (g.kind == BoundaryGeometryKind::CubeMinusSphere)
    out << "boundary_geometry cube_minus_sphere " << g.center[0] << " " << g.center[1]
        << " " << g.center[2] << " " << g.radius << "\n";
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

StraightMesh generate_ball_mesh(double radius, int level) {
  PSTOKES_REQUIRE(radius > 0.0, "generate_ball_mesh: radius must be positive");
  PSTOKES_REQUIRE(level >= 0, "generate_ball_mesh: level must be >= 0");

  // 3x3x3 vertex grid on [-1,1]^3; eight sub-cubes, each split into six Kuhn
  // tets whose shared diagonal runs from the outer corner to the domain
  // center. Every tet then touches the center vertex, which keeps the number
  // of boundary vertices per tet at three or less.
  auto vid = [](int i, int j, int k) { return (i * 3 + j) * 3 + k; };
  std::vector<Vertex> verts(27);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        verts[vid(i, j, k)].x = Eigen::Vector3d(i - 1.0, j - 1.0, k - 1.0);

  std::vector<Tetrahedron> tets;
  tets.reserve(48);
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int sx = 0; sx < 2; ++sx) {
    for (int sy = 0; sy < 2; ++sy) {
      for (int sz = 0; sz < 2; ++sz) {
        const int A[3] = {1, 1, 1};                      // the domain center
        const int d[3] = {2 * sx - 1, 2 * sy - 1, 2 * sz - 1};
        for (const auto& p : perms) {
          int cur[3] = {A[0], A[1], A[2]};
          Tetrahedron t;
          t.v[0] = vid(cur[0], cur[1], cur[2]);
          for (int step = 0; step < 3; ++step) {
            cur[p[step]] += d[p[step]];
            t.v[step + 1] = vid(cur[0], cur[1], cur[2]);
          }
          tets.push_back(t);
        }
      }
    }
  }

  // Map the cube onto the ball: p -> radius * p * |p|_inf / |p|_2.
  for (auto& v : verts) {
    const double linf = v.x.lpNorm<Eigen::Infinity>();
    const double l2 = v.x.norm();
    v.x = (l2 > 0.0) ? Eigen::Vector3d(radius * (linf / l2) * v.x)
                     : Eigen::Vector3d::Zero();
  }
  fix_orientation(tets, verts);

  BoundaryGeometryDesc geom;
  geom.kind = BoundaryGeometryKind::Sphere;
  geom.radius = radius;
  StraightMesh mesh(std::move(verts), std::move(tets), geom);
  for (int l = 0; l < level; ++l) mesh = uniform_refine(mesh);

  for (const auto& t : mesh.tets())
    PSTOKES_REQUIRE(t.boundary_vertex_count <= 3,
                    "generate_ball_mesh: boundary vertex count rule violated");
  return mesh;
}

StraightMesh generate_cavity_mesh(const Eigen::Vector3d& ball_center,
                                  double ball_radius, int target_tets) {
  PSTOKES_REQUIRE(ball_radius > 0.0, "generate_cavity_mesh: radius must be positive");
  double wall = std::numeric_limits<double>::max();
  for (int a = 0; a < 3; ++a)
    wall = std::min({wall, ball_center[a], 1.0 - ball_center[a]});
  PSTOKES_REQUIRE(ball_radius < wall, "generate_cavity_mesh: ball not strictly inside the cube");

  // The shell between the sphere and the cube surface is meshed with radial
  // prism layers over a triangulated cube surface: 36 * m^2 * L tets.
  if (target_tets < 288)
    throw MeshError("generate_cavity_mesh: target_tets " + std::to_string(target_tets) +
                    " too coarse to resolve the ball (minimum 288 tets)");
  int best_m = -1, best_l = -1;
  long long best_err = std::numeric_limits<long long>::max();
  for (int m = 2; m <= 64; ++m) {
    const int L = std::max(2, static_cast<int>(std::lround(0.45 * m)));
    const long long cost = 36LL * m * m * L;
    const long long err = std::llabs(cost - target_tets);
    if (err < best_err) {
      best_err = err;
      best_m = m;
      best_l = L;
    }
  }
  const int m = best_m, L = best_l;

  // Cube surface grid points.
  std::map<std::array<int, 3>, int> surf_id;
  std::vector<Eigen::Vector3d> surf_pts;
  auto surface_vertex = [&](int i, int j, int k) {
    auto it = surf_id.find({i, j, k});
    if (it != surf_id.end()) return it->second;
    const int id = static_cast<int>(surf_pts.size());
    surf_id.emplace(std::array<int, 3>{i, j, k}, id);
    surf_pts.emplace_back(double(i) / m, double(j) / m, double(k) / m);
    return id;
  };

  std::vector<std::array<int, 3>> surf_tris;
  auto add_face_grid = [&](int axis, int side) {
    // Grid over the two axes != axis, quad split along its min-id diagonal.
    const int u_axis = (axis + 1) % 3, v_axis = (axis + 2) % 3;
    for (int u = 0; u < m; ++u) {
      for (int v = 0; v < m; ++v) {
        auto gid = [&](int uu, int vv) {
          int c[3];
          c[axis] = side;
          c[u_axis] = uu;
          c[v_axis] = vv;
          return surface_vertex(c[0], c[1], c[2]);
        };
        const int p00 = gid(u, v), p10 = gid(u + 1, v);
        const int p11 = gid(u + 1, v + 1), p01 = gid(u, v + 1);
        const int lo = std::min({p00, p10, p11, p01});
        if (lo == p00 || lo == p11) {
          surf_tris.push_back({p00, p10, p11});
          surf_tris.push_back({p00, p11, p01});
        } else {
          surf_tris.push_back({p10, p11, p01});
          surf_tris.push_back({p10, p01, p00});
        }
      }
    }
  };
  for (int axis = 0; axis < 3; ++axis)
    for (int side : {0, m}) add_face_grid(axis, side);

  // Layered vertices along the rays from the sphere to the cube surface.
  const int ns = static_cast<int>(surf_pts.size());
  std::vector<Vertex> verts(static_cast<size_t>(ns) * (L + 1));
  for (int s = 0; s < ns; ++s) {
    const Eigen::Vector3d p = surf_pts[s];
    const Eigen::Vector3d w = p - ball_center;
    const Eigen::Vector3d sp = ball_center + ball_radius * w.normalized();
    for (int l = 0; l <= L; ++l) {
      const double t = double(l) / L;
      verts[static_cast<size_t>(s) * (L + 1) + l].x = (l == L) ? p : Eigen::Vector3d(sp + t * (p - sp));
    }
  }
  auto lv = [&](int s, int l) { return s * (L + 1) + l; };

  // Prism-to-tet split with quad diagonals through the smallest global id.
  std::vector<Tetrahedron> tets;
  tets.reserve(static_cast<size_t>(surf_tris.size()) * L * 3);
  auto emit = [&](int a, int b, int c, int d) {
    Tetrahedron t;
    t.v = {a, b, c, d};
    tets.push_back(t);
  };
  for (const auto& tri : surf_tris) {
    for (int l = 0; l < L; ++l) {
      int p[6] = {lv(tri[0], l),     lv(tri[1], l),     lv(tri[2], l),
                  lv(tri[0], l + 1), lv(tri[1], l + 1), lv(tri[2], l + 1)};
      // Rotate/flip so p[0] is the smallest id.
      int arg = 0;
      for (int i = 1; i < 6; ++i)
        if (p[i] < p[arg]) arg = i;
      if (arg >= 3) {
        std::swap(p[0], p[3]);
        std::swap(p[1], p[4]);
        std::swap(p[2], p[5]);
        arg -= 3;
      }
      while (arg > 0) {
        const int b0 = p[0], t0 = p[3];
        p[0] = p[1]; p[1] = p[2]; p[2] = b0;
        p[3] = p[4]; p[4] = p[5]; p[5] = t0;
        --arg;
      }
      if (std::min(p[1], p[5]) < std::min(p[2], p[4])) {
        emit(p[0], p[1], p[2], p[5]);
        emit(p[0], p[1], p[5], p[4]);
        emit(p[0], p[4], p[5], p[3]);
      } else {
        emit(p[0], p[1], p[2], p[4]);
        emit(p[0], p[4], p[2], p[5]);
        emit(p[0], p[4], p[5], p[3]);
      }
    }
  }

  fix_orientation(tets, verts);
  BoundaryGeometryDesc geom;
  geom.kind = BoundaryGeometryKind::CubeMinusSphere;
  geom.center = ball_center;
  geom.radius = ball_radius;
  StraightMesh mesh(std::move(verts), std::move(tets), geom);
  for (const auto& t : mesh.tets())
    PSTOKES_REQUIRE(t.boundary_vertex_count <= 3,
                    "generate_cavity_mesh: boundary vertex count rule violated");
  return mesh;
}

StraightMesh uniform_refine(const StraightMesh& mesh) {
  const auto& geom = mesh.geometry();
  std::vector<Vertex> verts = mesh.vertices();
  std::unordered_map<long long, int> midpoint;
  midpoint.reserve(mesh.n_tets() * 6);

  auto edge_key = [](int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<long long>(a) << 32) | static_cast<unsigned int>(b);
  };

  auto on_sphere = [&](const Eigen::Vector3d& x) {
    return std::abs((x - geom.center).norm() - geom.radius) <= 1e-8 * std::max(1.0, geom.radius);
  };

  auto mid_vertex = [&](int a, int b) {
    const long long key = edge_key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vertex v;
    v.x = 0.5 * (mesh.point(a) + mesh.point(b));
    if (mesh.is_boundary_edge(a, b)) {
      switch (geom.kind) {
        case BoundaryGeometryKind::Sphere:
          v.x = geom.center + geom.radius * (v.x - geom.center).normalized();
          break;
        case BoundaryGeometryKind::CubeMinusSphere:
          // Only sphere-patch edges are curved; cube facets are planar so the
          // straight midpoint already lies on them.
          if (on_sphere(mesh.point(a)) && on_sphere(mesh.point(b)))
            v.x = geom.center + geom.radius * (v.x - geom.center).normalized();
          break;
        case BoundaryGeometryKind::None:
          break;
      }
    }
    const int id = static_cast<int>(verts.size());
    verts.push_back(v);
    midpoint.emplace(key, id);
    return id;
  };

  std::vector<Tetrahedron> tets;
  tets.reserve(mesh.n_tets() * 8);
  auto emit = [&](int a, int b, int c, int d) {
    Tetrahedron t;
    t.v = {a, b, c, d};
    tets.push_back(t);
  };
  for (const auto& t : mesh.tets()) {
    const int v0 = t.v[0], v1 = t.v[1], v2 = t.v[2], v3 = t.v[3];
    const int m01 = mid_vertex(v0, v1), m02 = mid_vertex(v0, v2), m03 = mid_vertex(v0, v3);
    const int m12 = mid_vertex(v1, v2), m13 = mid_vertex(v1, v3), m23 = mid_vertex(v2, v3);
    emit(v0, m01, m02, m03);
    emit(m01, v1, m12, m13);
    emit(m02, m12, v2, m23);
    emit(m03, m13, m23, v3);
    // Octahedron split around the fixed diagonal m02-m13. Each resulting tet
    // keeps an interior vertex whenever the parent has at most three boundary
    // vertices, preserving the boundary-count rule under refinement.
    emit(m02, m13, m01, m03);
    emit(m02, m13, m03, m23);
    emit(m02, m13, m23, m12);
    emit(m02, m13, m12, m01);
  }

  fix_orientation(tets, verts);
  return StraightMesh(std::move(verts), std::move(tets), geom);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

TopologyReport validate_topology(const StraightMesh& mesh) {
  TopologyReport rep;
  rep.min_signed_volume = std::numeric_limits<double>::max();
  rep.min_shape_regularity = std::numeric_limits<double>::max();

  for (int t = 0; t < mesh.n_tets(); ++t) {
    const double vol = mesh.signed_volume(t);
    rep.min_signed_volume = std::min(rep.min_signed_volume, vol);
    if (!(vol > 0.0))
      rep.issues.push_back("tet " + std::to_string(t) + ": non-positive signed volume " +
                           std::to_string(vol));

    // inradius / diameter with inradius = 3V / (total face area)
    double area = 0.0;
    for (int l = 0; l < 4; ++l) {
      const Eigen::Vector3d a = mesh.tet_point(t, kTetFaceVertices[l][0]);
      const Eigen::Vector3d b = mesh.tet_point(t, kTetFaceVertices[l][1]);
      const Eigen::Vector3d c = mesh.tet_point(t, kTetFaceVertices[l][2]);
      area += 0.5 * (b - a).cross(c - a).norm();
    }
    const double rho = (area > 0.0) ? 3.0 * std::abs(vol) / area : 0.0;
    const double ratio = rho / mesh.tet_diameter(t);
    rep.min_shape_regularity = std::min(rep.min_shape_regularity, ratio);
    if (ratio < 0.05)
      rep.issues.push_back("tet " + std::to_string(t) + ": shape regularity " +
                           std::to_string(ratio) + " below floor 0.05");

    if (mesh.geometry().kind != BoundaryGeometryKind::None &&
        mesh.tet(t).boundary_vertex_count > 3)
      rep.issues.push_back("tet " + std::to_string(t) + ": " +
                           std::to_string(mesh.tet(t).boundary_vertex_count) +
                           " boundary vertices (allowed at most 3)");
  }

  // Euler face-count identity for conforming meshes.
  if (4 * mesh.n_tets() != 2 * mesh.n_interior_faces() + mesh.n_boundary_faces())
    rep.issues.push_back("face-count identity violated: 4*T != 2*Fi + Fb");

  // Watertight boundary: each boundary-face edge shared by exactly two
  // boundary faces.
  std::map<std::pair<int, int>, int> bedge_count;
  for (const auto& f : mesh.faces()) {
    if (f.kind != FaceKind::Boundary) continue;
    for (int i = 0; i < 3; ++i) {
      int a = f.v[i], b = f.v[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      bedge_count[{a, b}]++;
    }
  }
  for (const auto& [e, cnt] : bedge_count)
    if (cnt != 2)
      rep.issues.push_back("boundary edge (" + std::to_string(e.first) + "," +
                           std::to_string(e.second) + ") shared by " +
                           std::to_string(cnt) + " boundary faces");

  // Boundary fit against the exact geometry.
  const auto& geom = mesh.geometry();
  if (geom.kind != BoundaryGeometryKind::None) {
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      if (!mesh.vertices()[v].on_boundary) continue;
      const Eigen::Vector3d& x = mesh.point(v);
      double dist = std::abs((x - geom.center).norm() - geom.radius);
      if (geom.kind == BoundaryGeometryKind::CubeMinusSphere) {
        double cube = std::numeric_limits<double>::max();
        for (int a = 0; a < 3; ++a)
          cube = std::min({cube, std::abs(x[a]), std::abs(1.0 - x[a])});
        dist = std::min(dist, cube);
      }
      rep.max_boundary_distance = std::max(rep.max_boundary_distance, dist);
      if (dist > 1e-12 * std::max(1.0, geom.radius))
        rep.issues.push_back("vertex " + std::to_string(v) +
                             ": boundary deviation " + std::to_string(dist));
    }
  }

  rep.size_ratio =
      (mesh.min_tet_diameter() > 0.0) ? mesh.mesh_size() / mesh.min_tet_diameter() : 0.0;
  if (mesh.n_tets() == 0) rep.issues.push_back("mesh has no tetrahedra");
  return rep;
}

}  // namespace pstokes
