#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "meshparse/error.hpp"
#include "meshparse/label_space.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

enum class MeshFormat { obj, ply };

inline MeshFormat format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj") return MeshFormat::obj;
    if (ext == ".ply") return MeshFormat::ply;
    throw ContractError("cannot infer mesh format from extension of " + path.string());
}

namespace detail {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

// Appends polygon `idx` as a fan anchored at its first vertex, preserving file order.
inline void fan_triangulate(const std::vector<std::uint32_t>& idx, std::vector<Triangle>& out) {
    for (std::size_t i = 1; i + 1 < idx.size(); ++i) out.push_back({idx[0], idx[i], idx[i + 1]});
}

}  // namespace detail

inline Mesh load_obj(const std::filesystem::path& path) {
    const std::string text = detail::read_file(path);
    Mesh mesh;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::vector<std::uint32_t> poly;
    auto fail = [&](const std::string& what) {
        throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": " + what);
    };
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "v") {
            if (tok.size() < 4) fail("vertex needs 3 coordinates");
            Vec3f v;
            for (int a = 0; a < 3; ++a) {
                auto value = detail::parse_number<float>(tok[static_cast<std::size_t>(a) + 1]);
                if (!value) fail("bad vertex coordinate '" + std::string(tok[static_cast<std::size_t>(a) + 1]) + "'");
                v[static_cast<std::size_t>(a)] = *value;
            }
            mesh.vertices.push_back(v);
        } else if (tok[0] == "f") {
            if (tok.size() < 4) fail("face needs at least 3 vertices");
            poly.clear();
            for (std::size_t i = 1; i < tok.size(); ++i) {
                auto ref = tok[i].substr(0, tok[i].find('/'));
                auto value = detail::parse_number<long long>(ref);
                if (!value || *value == 0) fail("bad face index '" + std::string(tok[i]) + "'");
                long long idx = *value > 0 ? *value - 1 : static_cast<long long>(mesh.vertices.size()) + *value;
                if (idx < 0 || idx >= static_cast<long long>(mesh.vertices.size()))
                    throw ValidationError(path.string() + ": line " + std::to_string(line_no) + ": face index " +
                                          std::string(ref) + " out of range (" +
                                          std::to_string(mesh.vertices.size()) + " vertices)");
                poly.push_back(static_cast<std::uint32_t>(idx));
            }
            detail::fan_triangulate(poly, mesh.triangles);
        }
        // vt, vn, o, g, s, usemtl, mtllib: ignored.
    }
    mesh.validate();
    return mesh;
}

inline void save_obj(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    char buf[128];
    for (const auto& v : mesh.vertices) {
        // %.9g round-trips every float32 exactly.
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
        out << buf;
    }
    for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// PLY

namespace ply {

enum class Type { i8, u8, i16, u16, i32, u32, f32, f64 };

inline std::optional<Type> type_from_name(std::string_view n) {
    if (n == "char" || n == "int8") return Type::i8;
    if (n == "uchar" || n == "uint8") return Type::u8;
    if (n == "short" || n == "int16") return Type::i16;
    if (n == "ushort" || n == "uint16") return Type::u16;
    if (n == "int" || n == "int32") return Type::i32;
    if (n == "uint" || n == "uint32") return Type::u32;
    if (n == "float" || n == "float32") return Type::f32;
    if (n == "double" || n == "float64") return Type::f64;
    return std::nullopt;
}

inline std::size_t type_size(Type t) {
    switch (t) {
        case Type::i8: case Type::u8: return 1;
        case Type::i16: case Type::u16: return 2;
        case Type::i32: case Type::u32: case Type::f32: return 4;
        case Type::f64: return 8;
    }
    return 0;
}

struct Property {
    std::string name;
    Type type = Type::f32;
    bool is_list = false;
    Type count_type = Type::u8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

struct Header {
    bool binary = false;
    std::vector<Element> elements;
    std::size_t body_offset = 0;
};

inline Header parse_header(const std::string& data, const std::string& where) {
    Header h;
    std::size_t pos = 0, line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError(where + ": line " + std::to_string(line_no) + ": " + what);
    };
    bool saw_format = false;
    while (true) {
        std::size_t end = data.find('\n', pos);
        if (end == std::string::npos) {
            ++line_no;
            fail("unterminated PLY header");
        }
        std::string_view line(data.data() + pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++line_no;
        auto tok = detail::split_ws(line);
        if (line_no == 1) {
            if (tok.size() != 1 || tok[0] != "ply") fail("missing 'ply' magic");
            continue;
        }
        if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
        if (tok[0] == "format") {
            if (tok.size() < 2) fail("bad format line");
            if (tok[1] == "ascii") h.binary = false;
            else if (tok[1] == "binary_little_endian") h.binary = true;
            else fail("unsupported PLY format '" + std::string(tok[1]) + "'");
            saw_format = true;
        } else if (tok[0] == "element") {
            if (tok.size() != 3) fail("bad element line");
            auto count = detail::parse_number<std::size_t>(tok[2]);
            if (!count) fail("bad element count");
            h.elements.push_back({std::string(tok[1]), *count, {}});
        } else if (tok[0] == "property") {
            if (h.elements.empty()) fail("property before element");
            Property p;
            if (tok.size() == 5 && tok[1] == "list") {
                auto ct = type_from_name(tok[2]);
                auto it = type_from_name(tok[3]);
                if (!ct || !it) fail("bad list property types");
                p = {std::string(tok[4]), *it, true, *ct};
            } else if (tok.size() == 3) {
                auto t = type_from_name(tok[1]);
                if (!t) fail("unknown property type '" + std::string(tok[1]) + "'");
                p = {std::string(tok[2]), *t, false, Type::u8};
            } else {
                fail("bad property line");
            }
            h.elements.back().properties.push_back(p);
        } else if (tok[0] == "end_header") {
            break;
        } else {
            fail("unexpected header keyword '" + std::string(tok[0]) + "'");
        }
    }
    if (!saw_format) throw ParseError(where + ": PLY header has no format line");
    h.body_offset = pos;
    return h;
}

// Sequential scalar reader over the PLY body, in either encoding.
class BodyReader {
public:
    BodyReader(const std::string& data, const Header& h, std::string where)
        : data_(data), binary_(h.binary), pos_(h.body_offset), where_(std::move(where)) {}

    double read(Type t) {
        if (binary_) return read_binary(t);
        return read_ascii();
    }

    // ASCII rows must end where the element's properties end.
    void end_row() {
        if (binary_) return;
        while (pos_ < data_.size() && (data_[pos_] == ' ' || data_[pos_] == '\t' || data_[pos_] == '\r')) ++pos_;
        if (pos_ < data_.size() && data_[pos_] != '\n') fail("trailing data on row");
        if (pos_ < data_.size()) {
            ++pos_;
            ++line_;
        }
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        if (binary_) throw ParseError(where_ + ": byte offset " + std::to_string(pos_) + ": " + what);
        throw ParseError(where_ + ": body line " + std::to_string(line_) + ": " + what);
    }

    double read_ascii() {
        while (pos_ < data_.size() && (data_[pos_] == ' ' || data_[pos_] == '\t' || data_[pos_] == '\r')) ++pos_;
        if (pos_ >= data_.size() || data_[pos_] == '\n') fail("unexpected end of row");
        std::size_t end = pos_;
        while (end < data_.size() && !std::isspace(static_cast<unsigned char>(data_[end]))) ++end;
        auto value = detail::parse_number<double>(std::string_view(data_.data() + pos_, end - pos_));
        if (!value) fail("bad number '" + data_.substr(pos_, end - pos_) + "'");
        pos_ = end;
        return *value;
    }

    template <typename T>
    T take() {
        if (pos_ + sizeof(T) > data_.size()) fail("truncated binary body");
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    double read_binary(Type t) {
        switch (t) {
            case Type::i8: return take<std::int8_t>();
            case Type::u8: return take<std::uint8_t>();
            case Type::i16: return take<std::int16_t>();
            case Type::u16: return take<std::uint16_t>();
            case Type::i32: return take<std::int32_t>();
            case Type::u32: return take<std::uint32_t>();
            case Type::f32: return take<float>();
            case Type::f64: return take<double>();
        }
        return 0;
    }

    const std::string& data_;
    bool binary_;
    std::size_t pos_;
    std::size_t line_ = 1;
    std::string where_;
};

// Vertex positions, optional per-vertex labels and faces of a PLY file.
struct Contents {
    std::vector<Vec3f> vertices;
    std::vector<Label> labels;  // empty when the file has no `label` property
    std::vector<Triangle> triangles;
};

inline Contents read(const std::filesystem::path& path) {
    const std::string data = detail::read_file(path);
    const std::string where = path.string();
    const Header h = parse_header(data, where);
    BodyReader body(data, h, where);
    Contents c;
    std::vector<std::uint32_t> poly;
    for (const auto& el : h.elements) {
        const bool is_vertex = el.name == "vertex";
        const bool is_face = el.name == "face";
        int ix = -1, iy = -1, iz = -1, ilabel = -1, iface = -1;
        for (int p = 0; p < static_cast<int>(el.properties.size()); ++p) {
            const auto& name = el.properties[static_cast<std::size_t>(p)].name;
            if (name == "x") ix = p;
            else if (name == "y") iy = p;
            else if (name == "z") iz = p;
            else if (name == "label") ilabel = p;
            else if (name == "vertex_indices" || name == "vertex_index") iface = p;
        }
        if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) throw ParseError(where + ": vertex element lacks x/y/z");
        if (is_face && iface < 0) throw ParseError(where + ": face element lacks vertex_indices");
        if (is_vertex) {
            c.vertices.reserve(el.count);
            if (ilabel >= 0) c.labels.reserve(el.count);
        }
        for (std::size_t row = 0; row < el.count; ++row) {
            Vec3f v;
            poly.clear();
            for (int p = 0; p < static_cast<int>(el.properties.size()); ++p) {
                const auto& prop = el.properties[static_cast<std::size_t>(p)];
                if (prop.is_list) {
                    const double n = body.read(prop.count_type);
                    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
                        const double idx = body.read(prop.type);
                        if (p == iface) {
                            if (idx < 0) throw ValidationError(where + ": negative face index");
                            poly.push_back(static_cast<std::uint32_t>(idx));
                        }
                    }
                    continue;
                }
                const double value = body.read(prop.type);
                if (p == ix) v.x = static_cast<float>(value);
                else if (p == iy) v.y = static_cast<float>(value);
                else if (p == iz) v.z = static_cast<float>(value);
                else if (p == ilabel && is_vertex) c.labels.push_back(static_cast<Label>(value));
            }
            body.end_row();
            if (is_vertex) c.vertices.push_back(v);
            if (is_face) {
                if (poly.size() < 3) throw ParseError(where + ": face " + std::to_string(row) + " has fewer than 3 vertices");
                detail::fan_triangulate(poly, c.triangles);
            }
        }
    }
    return c;
}

}  // namespace ply

inline Mesh load_ply(const std::filesystem::path& path) {
    auto c = ply::read(path);
    Mesh mesh{std::move(c.vertices), std::move(c.triangles)};
    mesh.validate();
    return mesh;
}

inline Mesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
    return format == MeshFormat::obj ? load_obj(path) : load_ply(path);
}

inline Mesh load_mesh(const std::filesystem::path& path) { return load_mesh(path, format_from_path(path)); }

namespace detail {
template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}
}  // namespace detail

// Binary little-endian PLY with float32 positions and int32 face lists.
inline void save_ply(const Mesh& mesh, const std::filesystem::path& path) {
    std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(mesh.vertices.size()) +
                      "\nproperty float x\nproperty float y\nproperty float z\nelement face " +
                      std::to_string(mesh.triangles.size()) + "\nproperty list uchar int vertex_indices\nend_header\n";
    out.reserve(out.size() + mesh.vertices.size() * 12 + mesh.triangles.size() * 13);
    for (const auto& v : mesh.vertices) {
        detail::put(out, v.x);
        detail::put(out, v.y);
        detail::put(out, v.z);
    }
    for (const auto& t : mesh.triangles) {
        detail::put<std::uint8_t>(out, 3);
        for (auto i : t) detail::put(out, static_cast<std::int32_t>(i));
    }
    detail::write_file(path, out);
}

inline void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
    if (format_from_path(path) == MeshFormat::obj) save_obj(mesh, path);
    else save_ply(mesh, path);
}

// ---------------------------------------------------------------------------
// Labeled clouds: binary PLY (x,y,z float32; red,green,blue uint8; label uint16)
// plus a `<stem>.labels.txt` sidecar holding one decimal label per line.

inline std::filesystem::path sidecar_path(const std::filesystem::path& ply_path) {
    auto p = ply_path;
    p.replace_extension(".labels.txt");
    return p;
}

inline void save_labels_txt(const std::vector<Label>& labels, const std::filesystem::path& path) {
    std::string out;
    out.reserve(labels.size() * 3);
    for (auto l : labels) {
        out += std::to_string(l);
        out += '\n';
    }
    detail::write_file(path, out);
}

inline std::vector<Label> load_labels_txt(const std::filesystem::path& path) {
    const std::string text = detail::read_file(path);
    std::vector<Label> labels;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        ++line_no;
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        auto v = detail::parse_number<unsigned>(line);
        if (!v || *v > 0xFFFF) throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": bad label");
        labels.push_back(static_cast<Label>(*v));
    }
    return labels;
}

inline void save_labeled_cloud(const LabeledCloud& cloud, const std::filesystem::path& path) {
    cloud.validate();
    std::string out = "ply\nformat binary_little_endian 1.0\ncomment label_space " + cloud.label_space->name +
                      "\nelement vertex " + std::to_string(cloud.size()) +
                      "\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nproperty uchar "
                      "green\nproperty uchar blue\nproperty ushort label\nend_header\n";
    out.reserve(out.size() + cloud.size() * 17);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const auto& p = cloud.points[i];
        detail::put(out, p.x);
        detail::put(out, p.y);
        detail::put(out, p.z);
        for (auto c : palette_color(cloud.labels[i])) detail::put(out, c);
        detail::put(out, cloud.labels[i]);
    }
    detail::write_file(path, out);
    save_labels_txt(cloud.labels, sidecar_path(path));
}

// Reads a cloud written by save_labeled_cloud (or any PLY with a `label`
// vertex property). Falls back to the sidecar when the PLY has no labels.
inline LabeledCloud load_labeled_cloud(const std::filesystem::path& path, LabelSpacePtr space) {
    auto c = ply::read(path);
    LabeledCloud cloud{std::move(c.vertices), std::move(c.labels), std::move(space)};
    if (cloud.labels.empty()) cloud.labels = load_labels_txt(sidecar_path(path));
    cloud.validate();
    return cloud;
}

// Positions only, from any supported mesh or cloud file.
inline std::vector<Vec3f> load_points(const std::filesystem::path& path) {
    if (format_from_path(path) == MeshFormat::obj) return load_obj(path).vertices;
    return ply::read(path).vertices;
}

}  // namespace meshparse
