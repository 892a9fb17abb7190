#pragma once

// Mesh, point-cloud, weight and grid-dump file formats.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grid.hpp"
#include "mesh.hpp"
#include "mlp_udf.hpp"

namespace udfmc {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

/// Unreadable or malformed input. Messages name the file and, for text
/// formats, the 1-based line.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::ifstream open_in(const std::filesystem::path& p, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(p, mode);
    if (!in) throw IoError("cannot open '" + p.string() + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(p, mode);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    return out;
}

[[noreturn]] inline void parse_fail(const std::filesystem::path& p, std::size_t line, const std::string& what) {
    throw IoError(p.string() + ":" + std::to_string(line) + ": " + what);
}

inline std::string lower_ext(const std::filesystem::path& p) {
    std::string e = p.extension().string();
    for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return e;
}

}  // namespace detail

// ---------------------------------------------------------------- OBJ

inline void write_obj(const TriMesh& mesh, std::ostream& out) {
    char buf[96];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.8g %.8g %.8g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

inline void write_obj(const TriMesh& mesh, const std::filesystem::path& p) {
    auto out = detail::open_out(p);
    write_obj(mesh, out);
    if (!out) throw IoError("write failed for '" + p.string() + "'");
}

/// Reads v and f records; faces with more than three corners are fanned.
/// Texture/normal indices (v/t/n) and negative indices are accepted.
inline TriMesh read_obj(std::istream& in, const std::filesystem::path& name = "<stream>") {
    TriMesh mesh;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Point3 p;
            if (!(ls >> p.x >> p.y >> p.z)) detail::parse_fail(name, lineno, "malformed vertex");
            mesh.vertices.push_back(p);
        } else if (tag == "f") {
            std::vector<std::uint32_t> idx;
            std::string tok;
            while (ls >> tok) {
                const std::string head = tok.substr(0, tok.find('/'));
                long long i = 0;
                try {
                    std::size_t used = 0;
                    i = std::stoll(head, &used);
                    if (used != head.size()) throw std::invalid_argument(head);
                } catch (const std::exception&) {
                    detail::parse_fail(name, lineno, "bad face index '" + tok + "'");
                }
                const long long n = static_cast<long long>(mesh.vertices.size());
                if (i < 0) i = n + i + 1;
                if (i < 1 || i > n) detail::parse_fail(name, lineno, "face index " + head + " out of range");
                idx.push_back(static_cast<std::uint32_t>(i - 1));
            }
            if (idx.size() < 3) detail::parse_fail(name, lineno, "face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    return mesh;
}

inline TriMesh read_obj(const std::filesystem::path& p) {
    auto in = detail::open_in(p);
    return read_obj(in, p);
}

// ---------------------------------------------------------------- PLY

inline void write_ply(const TriMesh& mesh, const std::filesystem::path& p) {
    auto out = detail::open_out(p, std::ios::out | std::ios::binary);
    out << "ply\nformat binary_little_endian 1.0\n"
        << "element vertex " << mesh.vertices.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "element face " << mesh.faces.size() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    for (const auto& v : mesh.vertices) {
        const float xyz[3] = {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
        out.write(reinterpret_cast<const char*>(xyz), sizeof xyz);
    }
    for (const auto& f : mesh.faces) {
        const unsigned char n = 3;
        const std::int32_t idx[3] = {static_cast<std::int32_t>(f[0]), static_cast<std::int32_t>(f[1]),
                                     static_cast<std::int32_t>(f[2])};
        out.write(reinterpret_cast<const char*>(&n), 1);
        out.write(reinterpret_cast<const char*>(idx), sizeof idx);
    }
    if (!out) throw IoError("write failed for '" + p.string() + "'");
}

namespace detail {

inline std::size_t ply_type_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
    if (t == "double" || t == "float64") return 8;
    return 0;
}

inline double ply_read_scalar(const char* src, const std::string& t) {
    auto get = [&](auto v) {
        std::memcpy(&v, src, sizeof v);
        return static_cast<double>(v);
    };
    if (t == "char" || t == "int8") return get(std::int8_t{});
    if (t == "uchar" || t == "uint8") return get(std::uint8_t{});
    if (t == "short" || t == "int16") return get(std::int16_t{});
    if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
    if (t == "int" || t == "int32") return get(std::int32_t{});
    if (t == "uint" || t == "uint32") return get(std::uint32_t{});
    if (t == "float" || t == "float32") return get(float{});
    return get(double{});
}

}  // namespace detail

/// Binary little-endian PLY with vertex x/y/z (other vertex properties are
/// skipped) and a vertex_indices list. Polygons are fanned.
inline TriMesh read_ply(const std::filesystem::path& p) {
    auto in = detail::open_in(p, std::ios::in | std::ios::binary);
    struct Prop {
        std::string name, type, count_type;
        bool list = false;
    };
    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<Prop> props;
    };
    std::vector<Element> elements;
    std::string line;
    std::size_t lineno = 0;
    bool binary_le = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (lineno == 1) {
            if (tag != "ply") detail::parse_fail(p, lineno, "missing 'ply' magic");
            continue;
        }
        if (tag == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian") detail::parse_fail(p, lineno, "unsupported PLY format '" + fmt + "'");
            binary_le = true;
        } else if (tag == "element") {
            Element e;
            if (!(ls >> e.name >> e.count)) detail::parse_fail(p, lineno, "malformed element");
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty()) detail::parse_fail(p, lineno, "property before element");
            Prop pr;
            std::string t;
            ls >> t;
            if (t == "list") {
                pr.list = true;
                ls >> pr.count_type >> pr.type >> pr.name;
            } else {
                pr.type = t;
                ls >> pr.name;
            }
            if (pr.name.empty() || detail::ply_type_size(pr.type) == 0 ||
                (pr.list && detail::ply_type_size(pr.count_type) == 0))
                detail::parse_fail(p, lineno, "malformed property");
            elements.back().props.push_back(pr);
        } else if (tag == "end_header") {
            break;
        }
    }
    if (!binary_le) throw IoError(p.string() + ": missing format line");

    TriMesh mesh;
    std::vector<char> buf(16);
    auto read_bytes = [&](std::size_t n) {
        buf.resize(std::max(buf.size(), n));
        if (!in.read(buf.data(), static_cast<std::streamsize>(n))) throw IoError(p.string() + ": truncated body");
        return buf.data();
    };
    for (const auto& e : elements) {
        for (std::size_t i = 0; i < e.count; ++i) {
            Point3 v;
            std::vector<std::uint32_t> poly;
            for (const auto& pr : e.props) {
                if (pr.list) {
                    const auto n =
                        static_cast<std::size_t>(detail::ply_read_scalar(read_bytes(detail::ply_type_size(pr.count_type)), pr.count_type));
                    for (std::size_t k = 0; k < n; ++k) {
                        const double idx = detail::ply_read_scalar(read_bytes(detail::ply_type_size(pr.type)), pr.type);
                        if (e.name == "face") poly.push_back(static_cast<std::uint32_t>(idx));
                    }
                } else {
                    const double val = detail::ply_read_scalar(read_bytes(detail::ply_type_size(pr.type)), pr.type);
                    if (e.name == "vertex") {
                        if (pr.name == "x") v.x = val;
                        else if (pr.name == "y") v.y = val;
                        else if (pr.name == "z") v.z = val;
                    }
                }
            }
            if (e.name == "vertex") mesh.vertices.push_back(v);
            if (e.name == "face") {
                if (poly.size() < 3) throw IoError(p.string() + ": face " + std::to_string(i) + " has fewer than 3 vertices");
                for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
            }
        }
    }
    for (const auto& f : mesh.faces)
        for (auto idx : f)
            if (idx >= mesh.vertices.size()) throw IoError(p.string() + ": face index out of range");
    return mesh;
}

/// Dispatches on extension (.obj or .ply).
inline TriMesh read_mesh(const std::filesystem::path& p) {
    const std::string e = detail::lower_ext(p);
    if (e == ".obj") return read_obj(p);
    if (e == ".ply") return read_ply(p);
    throw IoError("unsupported mesh format '" + p.string() + "' (expected .obj or .ply)");
}

inline void write_mesh(const TriMesh& mesh, const std::filesystem::path& p) {
    const std::string e = detail::lower_ext(p);
    if (e == ".ply") return write_ply(mesh, p);
    if (e == ".obj") return write_obj(mesh, p);
    throw IoError("unsupported mesh format '" + p.string() + "' (expected .obj or .ply)");
}

// ---------------------------------------------------------------- XYZ

inline std::vector<Point3> read_xyz(const std::filesystem::path& p) {
    auto in = detail::open_in(p);
    std::vector<Point3> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        Point3 q;
        if (!(ls >> q.x >> q.y >> q.z)) detail::parse_fail(p, lineno, "expected three coordinates");
        pts.push_back(q);
    }
    return pts;
}

inline void write_xyz(const std::vector<Point3>& pts, const std::filesystem::path& p) {
    auto out = detail::open_out(p);
    char buf[96];
    for (const auto& q : pts) {
        std::snprintf(buf, sizeof buf, "%.8g %.8g %.8g\n", q.x, q.y, q.z);
        out << buf;
    }
}

// ---------------------------------------------------------------- JSON / weights

inline nlohmann::json read_json(const std::filesystem::path& p) {
    auto in = detail::open_in(p);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(p.string() + ": " + e.what());
    }
}

inline MlpUdf read_weights(const std::filesystem::path& p) {
    const auto j = read_json(p);
    try {
        return MlpUdf::from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(p.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(p.string() + ": " + e.what());
    }
}

inline void write_weights(const MlpUdf& net, const std::filesystem::path& p) {
    auto out = detail::open_out(p);
    out << net.to_json().dump(1) << '\n';
}

// ---------------------------------------------------------------- grid dump
//
// <name>.raw holds planar float32 channels (each x-fastest over all corners);
// <name>.json describes the lattice and the channel list.

inline nlohmann::json grid_spec_json(const GridSpec& s) {
    return {{"bounds_min", {s.bounds_min.x, s.bounds_min.y, s.bounds_min.z}},
            {"bounds_max", {s.bounds_max.x, s.bounds_max.y, s.bounds_max.z}},
            {"resolution", s.resolution}};
}

inline GridSpec grid_spec_from_json(const nlohmann::json& j) {
    GridSpec s;
    const auto lo = j.at("bounds_min").get<std::vector<double>>();
    const auto hi = j.at("bounds_max").get<std::vector<double>>();
    if (lo.size() != 3 || hi.size() != 3) throw std::invalid_argument("grid bounds need three values");
    s.bounds_min = {lo[0], lo[1], lo[2]};
    s.bounds_max = {hi[0], hi[1], hi[2]};
    s.resolution = j.at("resolution").get<std::uint32_t>();
    s.validate();
    return s;
}

inline void write_grid_dump(const GridSamples& g, const std::filesystem::path& raw_path, bool with_gradient) {
    auto raw = detail::open_out(raw_path, std::ios::out | std::ios::binary);
    const std::size_t n = g.u.size();
    std::vector<float> chan(n);
    auto emit = [&](auto get) {
        for (std::size_t i = 0; i < n; ++i) chan[i] = static_cast<float>(get(i));
        raw.write(reinterpret_cast<const char*>(chan.data()), static_cast<std::streamsize>(n * sizeof(float)));
    };
    emit([&](std::size_t i) { return g.u[i]; });
    if (with_gradient)
        for (int a = 0; a < 3; ++a) emit([&](std::size_t i) { return g.g[i][a]; });
    if (!raw) throw IoError("write failed for '" + raw_path.string() + "'");

    nlohmann::json meta;
    meta["grid"] = grid_spec_json(g.spec);
    meta["dtype"] = "float32";
    meta["order"] = "x-fastest";
    meta["channels"] = with_gradient ? std::vector<std::string>{"u", "gx", "gy", "gz"} : std::vector<std::string>{"u"};
    meta["raw"] = raw_path.filename().string();
    auto side = detail::open_out(std::filesystem::path(raw_path).replace_extension(".json"));
    side << meta.dump(1) << '\n';
}

/// Loads a dump via its JSON sidecar. Without gradient channels the gradients
/// are rebuilt by finite differences.
inline GridSamples read_grid_dump(const std::filesystem::path& json_path) {
    const auto meta = read_json(json_path);
    GridSamples g;
    std::vector<std::string> channels;
    std::filesystem::path raw_path;
    try {
        g.spec = grid_spec_from_json(meta.at("grid"));
        channels = meta.at("channels").get<std::vector<std::string>>();
        raw_path = json_path.parent_path() / meta.at("raw").get<std::string>();
    } catch (const std::exception& e) {
        throw IoError(json_path.string() + ": " + e.what());
    }
    const bool grad = channels == std::vector<std::string>{"u", "gx", "gy", "gz"};
    if (!grad && channels != std::vector<std::string>{"u"})
        throw IoError(json_path.string() + ": unsupported channel list");
    const std::size_t n = g.spec.num_corners();
    auto raw = detail::open_in(raw_path, std::ios::in | std::ios::binary);
    std::vector<float> chan(n);
    auto load = [&]() {
        if (!raw.read(reinterpret_cast<char*>(chan.data()), static_cast<std::streamsize>(n * sizeof(float))))
            throw IoError(raw_path.string() + ": truncated grid dump");
    };
    load();
    g.u.assign(chan.begin(), chan.end());
    if (grad) {
        g.g.assign(n, Vec3{});
        for (int a = 0; a < 3; ++a) {
            load();
            for (std::size_t i = 0; i < n; ++i) g.g[i][a] = chan[i];
        }
        g.degenerate.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) g.degenerate[i] = g.u[i] == 0.0 ? 1 : 0;
    } else {
        finite_difference_gradients(g);
    }
    return g;
}

}  // namespace udfmc
