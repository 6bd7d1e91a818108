#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "infharm/analysis.hpp"
#include "infharm/fespace.hpp"

namespace infharm {

// Named column of per-row doubles for CSV output.
struct CsvColumn {
    std::string name;
    std::vector<double> values;
};

// Comma-separated table, every number printed with %.17g.
void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& columns);

// Vertex table: x, y, u1..uN.
void write_csv_solution(const std::filesystem::path& path, const VectorField& field);

// Per-vertex scalar field attached by name.
struct NamedNodalField {
    std::string name;
    Eigen::VectorXd values;
};

// Per-element scalar field attached by name.
struct NamedElementField {
    std::string name;
    std::vector<double> values;
};

// Legacy ASCII unstructured-grid file with triangle cells (type 5), optional
// point vectors (the solution), point scalars and cell scalars.
void write_vtk(const std::filesystem::path& path, const TriMesh& mesh,
               const std::string& title, const VectorField* point_vectors,
               const std::vector<NamedNodalField>& point_scalars,
               const std::vector<NamedElementField>& cell_scalars);

// The image surface as a legacy ASCII unstructured grid (two-component
// images lie in the z = 0 plane).
void write_vtk_surface(const std::filesystem::path& path, const SurfaceMesh& surface,
                       const std::string& title);

// Contour plot: linearly color-mapped triangles of the nodal field plus one
// path element per polyline, axes spanning the square.
void write_svg_contours(const std::filesystem::path& path, const TriMesh& mesh,
                        const Eigen::VectorXd& nodal,
                        const std::vector<Polyline>& polylines);

} // namespace infharm
