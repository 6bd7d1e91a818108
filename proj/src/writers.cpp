#include "infharm/writers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "infharm/exceptions.hpp"

namespace infharm {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    return out;
}

} // namespace

void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& columns) {
    if (columns.empty()) throw InvalidArgumentError("CSV needs at least one column");
    const size_t rows = columns.front().values.size();
    for (const auto& col : columns) {
        if (col.values.size() != rows) {
            throw InvalidArgumentError("CSV columns have unequal lengths");
        }
    }
    std::ofstream out = open_out(path);
    for (size_t c = 0; c < columns.size(); ++c) {
        out << (c ? "," : "") << columns[c].name;
    }
    out << "\n";
    for (size_t r = 0; r < rows; ++r) {
        for (size_t c = 0; c < columns.size(); ++c) {
            out << (c ? "," : "") << fmt17(columns[c].values[r]);
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_csv_solution(const std::filesystem::path& path, const VectorField& field) {
    const TriMesh& mesh = field.mesh();
    std::vector<CsvColumn> cols;
    CsvColumn x{"x", {}};
    CsvColumn y{"y", {}};
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        x.values.push_back(mesh.vertex(v).x());
        y.values.push_back(mesh.vertex(v).y());
    }
    cols.push_back(std::move(x));
    cols.push_back(std::move(y));
    for (int c = 0; c < field.n_components(); ++c) {
        CsvColumn col{"u" + std::to_string(c + 1), {}};
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            col.values.push_back(field.values()(v, c));
        }
        cols.push_back(std::move(col));
    }
    write_csv(path, cols);
}

namespace {

void write_vtk_header(std::ofstream& out, const std::string& title) {
    out << "# vtk DataFile Version 3.0\n";
    out << title << "\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
}

void write_vtk_cells(std::ofstream& out, const std::vector<std::array<int, 3>>& triangles) {
    const size_t nt = triangles.size();
    out << "CELLS " << nt << " " << 4 * nt << "\n";
    for (const auto& t : triangles) {
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    }
    out << "CELL_TYPES " << nt << "\n";
    for (size_t k = 0; k < nt; ++k) out << "5\n";
}

} // namespace

void write_vtk(const std::filesystem::path& path, const TriMesh& mesh,
               const std::string& title, const VectorField* point_vectors,
               const std::vector<NamedNodalField>& point_scalars,
               const std::vector<NamedElementField>& cell_scalars) {
    std::ofstream out = open_out(path);
    write_vtk_header(out, title);

    const int nv = mesh.num_vertices();
    out << "POINTS " << nv << " double\n";
    for (int v = 0; v < nv; ++v) {
        out << fmt17(mesh.vertex(v).x()) << " " << fmt17(mesh.vertex(v).y()) << " 0\n";
    }
    std::vector<std::array<int, 3>> tris;
    tris.reserve(mesh.num_triangles());
    for (int k = 0; k < mesh.num_triangles(); ++k) tris.push_back(mesh.triangle(k));
    write_vtk_cells(out, tris);

    if (point_vectors || !point_scalars.empty()) {
        out << "POINT_DATA " << nv << "\n";
        if (point_vectors) {
            const VectorField& f = *point_vectors;
            if (f.values().rows() != nv) {
                throw InvalidArgumentError("point vectors do not match the mesh");
            }
            out << "VECTORS solution double\n";
            for (int v = 0; v < nv; ++v) {
                for (int c = 0; c < 3; ++c) {
                    const double val = c < f.n_components() ? f.values()(v, c) : 0.0;
                    out << (c ? " " : "") << fmt17(val);
                }
                out << "\n";
            }
        }
        for (const auto& field : point_scalars) {
            if (field.values.size() != nv) {
                throw InvalidArgumentError("point scalars do not match the mesh");
            }
            out << "SCALARS " << field.name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (int v = 0; v < nv; ++v) out << fmt17(field.values[v]) << "\n";
        }
    }
    if (!cell_scalars.empty()) {
        out << "CELL_DATA " << mesh.num_triangles() << "\n";
        for (const auto& field : cell_scalars) {
            if (static_cast<int>(field.values.size()) != mesh.num_triangles()) {
                throw InvalidArgumentError("cell scalars do not match the mesh");
            }
            out << "SCALARS " << field.name << " double 1\n";
            out << "LOOKUP_TABLE default\n";
            for (double v : field.values) out << fmt17(v) << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_vtk_surface(const std::filesystem::path& path, const SurfaceMesh& surface,
                       const std::string& title) {
    std::ofstream out = open_out(path);
    write_vtk_header(out, title);

    const Eigen::Index nv = surface.vertices.rows();
    const Eigen::Index nc = surface.vertices.cols();
    out << "POINTS " << nv << " double\n";
    for (Eigen::Index v = 0; v < nv; ++v) {
        for (int c = 0; c < 3; ++c) {
            const double val = c < nc ? surface.vertices(v, c) : 0.0;
            out << (c ? " " : "") << fmt17(val);
        }
        out << "\n";
    }
    write_vtk_cells(out, surface.triangles);
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

// Diverging blue-white-red map on [-1, 1].
std::string diverging_color(double t) {
    t = std::clamp(t, -1.0, 1.0);
    int r, g, b;
    if (t < 0.0) {
        const double s = -t;
        r = static_cast<int>(std::lround(255.0 + s * (43.0 - 255.0)));
        g = static_cast<int>(std::lround(255.0 + s * (131.0 - 255.0)));
        b = static_cast<int>(std::lround(255.0 + s * (186.0 - 255.0)));
    } else {
        r = static_cast<int>(std::lround(255.0 + t * (215.0 - 255.0)));
        g = static_cast<int>(std::lround(255.0 + t * (25.0 - 255.0)));
        b = static_cast<int>(std::lround(255.0 + t * (28.0 - 255.0)));
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

} // namespace

void write_svg_contours(const std::filesystem::path& path, const TriMesh& mesh,
                        const Eigen::VectorXd& nodal,
                        const std::vector<Polyline>& polylines) {
    if (nodal.size() != mesh.num_vertices()) {
        throw InvalidArgumentError("nodal field size does not match the mesh");
    }
    constexpr double size = 800.0;
    constexpr double margin = 40.0;
    auto px = [&](double x) { return margin + (x + 1.0) * 0.5 * size; };
    auto py = [&](double y) { return margin + (1.0 - y) * 0.5 * size; };
    auto fmt3 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        return std::string(buf);
    };

    double vmax = 0.0;
    for (Eigen::Index v = 0; v < nodal.size(); ++v) {
        vmax = std::max(vmax, std::abs(nodal[v]));
    }
    if (vmax == 0.0) vmax = 1.0;

    std::ofstream out = open_out(path);
    const double total = size + 2.0 * margin;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total
        << "\" height=\"" << total << "\" viewBox=\"0 0 " << total << " " << total
        << "\">\n";

    // Element fill from the mean nodal value.
    for (int k = 0; k < mesh.num_triangles(); ++k) {
        const auto& t = mesh.triangle(k);
        const double mean = (nodal[t[0]] + nodal[t[1]] + nodal[t[2]]) / 3.0;
        out << "<polygon points=\"";
        for (int a = 0; a < 3; ++a) {
            const Eigen::Vector2d& vtx = mesh.vertex(t[a]);
            out << (a ? " " : "") << fmt3(px(vtx.x())) << "," << fmt3(py(vtx.y()));
        }
        out << "\" fill=\"" << diverging_color(mean / vmax) << "\" stroke=\"none\"/>\n";
    }

    for (const auto& line : polylines) {
        if (line.points.empty()) continue;
        out << "<path d=\"";
        for (size_t i = 0; i < line.points.size(); ++i) {
            out << (i == 0 ? "M " : "L ") << fmt3(px(line.points[i].x())) << " "
                << fmt3(py(line.points[i].y())) << " ";
        }
        out << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    }

    // Frame and corner labels for the [-1, 1] axes.
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size
        << "\" height=\"" << size << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << px(-1.0) << "\" y=\"" << py(-1.0) + 24.0
        << "\" font-size=\"14\">-1</text>\n";
    out << "<text x=\"" << px(1.0) - 10.0 << "\" y=\"" << py(-1.0) + 24.0
        << "\" font-size=\"14\">1</text>\n";
    out << "<text x=\"" << px(-1.0) - 24.0 << "\" y=\"" << py(1.0)
        << "\" font-size=\"14\">1</text>\n";
    out << "</svg>\n";
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace infharm
