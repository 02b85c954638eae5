#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vtfem/elasticity.hpp"
#include "vtfem/mesh.hpp"
#include "vtfem/vessel.hpp"

namespace vtfem {

/// Full-precision decimal rendering (17 significant digits, '.' separator).
std::string format_double(double v);

/// Header + rows, comma separator, constant column count, deterministic
/// row order.  Numeric cells are rendered with format_double at insertion.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::string to_string() const;
};

void write_csv(const CsvTable &table, const std::string &path);

/// Legacy ASCII VTK (DataFile Version 3.0) unstructured grid with cell type
/// 9 (quad) / 12 (hex) and POINT_DATA VECTORS "displacement"; 2D vectors are
/// padded with a zero third component.
template <int dim>
void write_vtk(const Mesh<dim> &mesh, const Field<dim> &field, const std::string &path);

/// Vessel interchange text format: one block per segment,
///   SEGMENT n
///   x y z radius pressure     (n lines, full double precision)
/// 2D networks are written as single-point blocks with z = 0.
void write_network(const VesselNetwork &net, std::ostream &os);
void write_network(const VesselNetwork &net, const std::string &path);
VesselNetwork read_network(std::istream &is, int dim);
VesselNetwork read_network(const std::string &path, int dim);

extern template void write_vtk<2>(const Mesh<2> &, const Field<2> &, const std::string &);
extern template void write_vtk<3>(const Mesh<3> &, const Field<3> &, const std::string &);

}  // namespace vtfem
