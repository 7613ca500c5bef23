#pragma once

// Base triangle mesh: loading (OBJ/PLY), validation, derived quantities
// (face normals/areas, edge adjacency), area normalization, manifold report.

#include "vec3.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace voromesh {

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Face = std::array<int, 3>;

// Undirected edge key, smaller index first.
inline std::pair<int, int> edge_key(int a, int b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;

    // Derived (filled by finalize()).
    std::vector<Vec3> face_normals;   // unit, or zero for degenerate faces
    std::vector<double> face_areas;
    std::map<std::pair<int, int>, std::vector<int>> edge_adjacency;
    std::vector<int> degenerate_faces;  // zero-area faces, excluded from decomposition
    double total_area = 0.0;

    Box3 bounding_box() const {
        Box3 b;
        for (const Vec3& v : vertices) b.expand(v);
        return b;
    }

    Vec3 face_centroid(int f) const {
        const Face& t = faces[f];
        return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
    }

    // Computes normals, areas, adjacency. Input normals are never trusted.
    void finalize() {
        const int nv = static_cast<int>(vertices.size());
        face_normals.assign(faces.size(), Vec3{});
        face_areas.assign(faces.size(), 0.0);
        edge_adjacency.clear();
        degenerate_faces.clear();
        total_area = 0.0;
        for (size_t f = 0; f < faces.size(); ++f) {
            const Face& t = faces[f];
            for (int k = 0; k < 3; ++k) {
                if (t[k] < 0 || t[k] >= nv)
                    throw MeshError("face " + std::to_string(f) + " references vertex " +
                                    std::to_string(t[k]) + " out of range");
            }
            if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
                throw MeshError("face " + std::to_string(f) + " has repeated vertices");
            Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
            double a2 = n.norm();
            face_areas[f] = 0.5 * a2;
            total_area += face_areas[f];
            if (a2 > 0.0)
                face_normals[f] = n / a2;
            else
                degenerate_faces.push_back(static_cast<int>(f));
            for (int k = 0; k < 3; ++k)
                edge_adjacency[edge_key(t[k], t[(k + 1) % 3])].push_back(static_cast<int>(f));
        }
    }
};

// Maps input coordinates to normalized ones: q = (p - translation) * scale.
struct NormalizationTransform {
    double scale = 1.0;
    Vec3 translation{};

    Vec3 apply(const Vec3& p) const { return (p - translation) * scale; }
    Vec3 invert(const Vec3& q) const { return q / scale + translation; }
};

// ---------------------------------------------------------------------------
// OBJ

namespace detail {

inline int parse_obj_index(const std::string& tok, int n_vertices, int line_no) {
    size_t slash = tok.find('/');
    std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
    int idx = 0;
    try {
        idx = std::stoi(head);
    } catch (...) {
        throw MeshError("OBJ parse error at line " + std::to_string(line_no) +
                        ": bad face index '" + tok + "'");
    }
    if (idx < 0) idx = n_vertices + idx + 1;  // relative indexing
    if (idx < 1 || idx > n_vertices)
        throw MeshError("OBJ parse error at line " + std::to_string(line_no) +
                        ": face index " + head + " out of range (OBJ is 1-based)");
    return idx - 1;
}

inline TriangleMesh load_obj(std::istream& in) {
    TriangleMesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "v") {
            Vec3 p;
            if (!(ls >> p.x >> p.y >> p.z))
                throw MeshError("OBJ parse error at line " + std::to_string(line_no) +
                                ": vertex needs 3 coordinates");
            mesh.vertices.push_back(p);
        } else if (key == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok)
                idx.push_back(parse_obj_index(tok, static_cast<int>(mesh.vertices.size()), line_no));
            if (idx.size() < 3)
                throw MeshError("OBJ parse error at line " + std::to_string(line_no) +
                                ": face needs at least 3 vertices");
            for (size_t k = 1; k + 1 < idx.size(); ++k)
                mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
        // vt/vn/usemtl/g/o/s/l/#... ignored: geometry-only pipeline
    }
    return mesh;
}

// ---------------------------------------------------------------------------
// PLY (ascii and binary_little_endian)

struct PlyProperty {
    std::string name;
    std::string type;       // scalar type, or value type for lists
    std::string count_type; // nonempty for lists
    bool is_list = false;
};

struct PlyElement {
    std::string name;
    size_t count = 0;
    std::vector<PlyProperty> props;
};

inline size_t ply_type_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
        t == "float32")
        return 4;
    if (t == "double" || t == "float64" || t == "int64" || t == "uint64") return 8;
    throw MeshError("PLY: unknown type '" + t + "'");
}

inline double ply_read_binary_scalar(std::istream& in, const std::string& t) {
    unsigned char buf[8];
    size_t n = ply_type_size(t);
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    if (!in) throw MeshError("PLY: unexpected end of binary data");
    auto as = [&](auto v) { std::memcpy(&v, buf, sizeof v); return static_cast<double>(v); };
    if (t == "char" || t == "int8") return as(int8_t{});
    if (t == "uchar" || t == "uint8") return as(uint8_t{});
    if (t == "short" || t == "int16") return as(int16_t{});
    if (t == "ushort" || t == "uint16") return as(uint16_t{});
    if (t == "int" || t == "int32") return as(int32_t{});
    if (t == "uint" || t == "uint32") return as(uint32_t{});
    if (t == "float" || t == "float32") return as(float{});
    if (t == "double" || t == "float64") return as(double{});
    if (t == "int64") return as(int64_t{});
    if (t == "uint64") return as(uint64_t{});
    throw MeshError("PLY: unknown type '" + t + "'");
}

inline TriangleMesh load_ply(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw MeshError("PLY parse error at line 1: missing 'ply' magic");
    bool binary = false;
    std::vector<PlyElement> elements;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "comment" || key == "obj_info") continue;
        if (key == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "ascii") binary = false;
            else if (fmt == "binary_little_endian") binary = true;
            else
                throw MeshError("PLY parse error at line " + std::to_string(line_no) +
                                ": unsupported format '" + fmt + "'");
        } else if (key == "element") {
            PlyElement el;
            ls >> el.name >> el.count;
            elements.push_back(el);
        } else if (key == "property") {
            if (elements.empty())
                throw MeshError("PLY parse error at line " + std::to_string(line_no) +
                                ": property before element");
            PlyProperty p;
            std::string t;
            ls >> t;
            if (t == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type >> p.name;
            } else {
                p.type = t;
                ls >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (key == "end_header") {
            break;
        }
    }

    TriangleMesh mesh;
    for (const PlyElement& el : elements) {
        const bool is_vertex = el.name == "vertex";
        const bool is_face = el.name == "face";
        for (size_t i = 0; i < el.count; ++i) {
            Vec3 p;
            std::vector<int> face_idx;
            if (!binary) {
                std::getline(in, line);
                ++line_no;
                std::istringstream ls(line);
                for (const PlyProperty& pr : el.props) {
                    if (pr.is_list) {
                        long cnt = 0;
                        if (!(ls >> cnt))
                            throw MeshError("PLY parse error at line " + std::to_string(line_no));
                        for (long k = 0; k < cnt; ++k) {
                            double v;
                            if (!(ls >> v))
                                throw MeshError("PLY parse error at line " +
                                                std::to_string(line_no));
                            if (is_face && (pr.name == "vertex_indices" || pr.name == "vertex_index"))
                                face_idx.push_back(static_cast<int>(v));
                        }
                    } else {
                        double v;
                        if (!(ls >> v))
                            throw MeshError("PLY parse error at line " + std::to_string(line_no));
                        if (is_vertex && pr.name == "x") p.x = v;
                        if (is_vertex && pr.name == "y") p.y = v;
                        if (is_vertex && pr.name == "z") p.z = v;
                    }
                }
            } else {
                for (const PlyProperty& pr : el.props) {
                    if (pr.is_list) {
                        long cnt = static_cast<long>(ply_read_binary_scalar(in, pr.count_type));
                        for (long k = 0; k < cnt; ++k) {
                            double v = ply_read_binary_scalar(in, pr.type);
                            if (is_face && (pr.name == "vertex_indices" || pr.name == "vertex_index"))
                                face_idx.push_back(static_cast<int>(v));
                        }
                    } else {
                        double v = ply_read_binary_scalar(in, pr.type);
                        if (is_vertex && pr.name == "x") p.x = v;
                        if (is_vertex && pr.name == "y") p.y = v;
                        if (is_vertex && pr.name == "z") p.z = v;
                    }
                }
            }
            if (is_vertex) mesh.vertices.push_back(p);
            if (is_face) {
                if (face_idx.size() < 3)
                    throw MeshError("PLY: face with fewer than 3 indices");
                for (size_t k = 1; k + 1 < face_idx.size(); ++k)
                    mesh.faces.push_back({face_idx[0], face_idx[k], face_idx[k + 1]});
            }
        }
    }
    return mesh;
}

} // namespace detail

inline TriangleMesh load_mesh(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MeshError("cannot open '" + path + "'");
    TriangleMesh mesh;
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == "obj") mesh = detail::load_obj(in);
    else if (ext == "ply") mesh = detail::load_ply(in);
    else throw MeshError("unsupported mesh format '" + ext + "' (OBJ or PLY)");
    if (mesh.faces.empty()) throw MeshError("'" + path + "' contains no faces");
    mesh.finalize();
    return mesh;
}

// Writes positions and faces only, always as ASCII OBJ.
inline void write_mesh(const TriangleMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot open '" + path + "' for writing");
    out.precision(17);
    for (const Vec3& v : mesh.vertices) out << "v " << v << "\n";
    for (const Face& f : mesh.faces)
        out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
    if (!out) throw MeshError("write failed for '" + path + "'");
}

// Rescales so total surface area is 1; centers the bounding box at the origin.
inline std::pair<TriangleMesh, NormalizationTransform> normalize_area(const TriangleMesh& mesh) {
    if (mesh.total_area <= 0.0) throw MeshError("cannot normalize a zero-area mesh");
    NormalizationTransform t;
    t.translation = mesh.bounding_box().center();
    t.scale = 1.0 / std::sqrt(mesh.total_area);
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v = t.apply(v);
    out.finalize();
    return {out, t};
}

inline TriangleMesh denormalize(const TriangleMesh& mesh, const NormalizationTransform& t) {
    TriangleMesh out = mesh;
    for (Vec3& v : out.vertices) v = t.invert(v);
    out.finalize();
    return out;
}

// Boundary (open) edge count and non-manifold vertex count.
//
// A vertex is manifold when its incident faces form a single fan: no incident
// edge with >2 faces, one connected component, and 0 (disk) or 2 (half-disk)
// boundary edges at the vertex. Isolated vertices are not counted.
inline std::pair<int, int> manifold_report(const TriangleMesh& mesh) {
    int open_b = 0;
    for (const auto& [e, fs] : mesh.edge_adjacency)
        if (fs.size() == 1) ++open_b;

    std::vector<std::vector<int>> vertex_faces(mesh.vertices.size());
    for (size_t f = 0; f < mesh.faces.size(); ++f)
        for (int k = 0; k < 3; ++k) vertex_faces[mesh.faces[f][k]].push_back(static_cast<int>(f));

    int nmv = 0;
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        const auto& inc = vertex_faces[v];
        if (inc.empty()) continue;
        bool bad = false;
        int boundary_edges = 0;
        // Edges at v and their incident faces among inc.
        std::map<std::pair<int, int>, std::vector<int>> local;
        for (int f : inc) {
            const Face& t = mesh.faces[f];
            for (int k = 0; k < 3; ++k) {
                int a = t[k], b = t[(k + 1) % 3];
                if (a == static_cast<int>(v) || b == static_cast<int>(v))
                    local[edge_key(a, b)].push_back(f);
            }
        }
        // Union faces sharing a v-incident edge.
        std::map<int, int> comp;
        for (int f : inc) comp[f] = f;
        std::function<int(int)> find = [&](int a) {
            while (comp[a] != a) a = comp[a] = comp[comp[a]];
            return a;
        };
        for (const auto& [e, fs] : local) {
            if (fs.size() > 2) bad = true;
            if (fs.size() == 1) ++boundary_edges;
            for (size_t k = 1; k < fs.size(); ++k) comp[find(fs[0])] = find(fs[k]);
        }
        std::set<int> roots;
        for (int f : inc) roots.insert(find(f));
        if (roots.size() > 1) bad = true;
        if (boundary_edges != 0 && boundary_edges != 2) bad = true;
        if (bad) ++nmv;
    }
    return {open_b, nmv};
}

} // namespace voromesh
