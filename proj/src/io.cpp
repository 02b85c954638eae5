#include "vtfem/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vtfem {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size())
    throw std::invalid_argument("CsvTable: row length does not match header");
  rows.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto &row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

void write_csv(const CsvTable &table, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path);
  os << table.to_string();
  if (!os) throw std::runtime_error("write_csv: write failed for " + path);
}

namespace {

// VTK corner order for quads/hexes versus our bit-per-axis corner order.
const int kVtkQuadOrder[4] = {0, 1, 3, 2};
const int kVtkHexOrder[8] = {0, 1, 3, 2, 4, 5, 7, 6};

}  // namespace

template <int dim>
void write_vtk(const Mesh<dim> &mesh, const Field<dim> &field, const std::string &path) {
  if (field.mesh != &mesh) throw std::invalid_argument("write_vtk: field/mesh mismatch");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_vtk: cannot open " + path);

  os << "# vtk DataFile Version 3.0\n";
  os << "vtfem displacement field\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.n_nodes() << " double\n";
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const Vec<dim> &p = mesh.node(n);
    os << format_double(p[0]) << " " << format_double(p[1]) << " "
       << format_double(dim == 3 ? p[dim - 1] : 0.0) << "\n";
  }
  constexpr int nc = 1 << dim;
  os << "CELLS " << mesh.n_cells() << " " << std::size_t(mesh.n_cells()) * (nc + 1) << "\n";
  const int *order = dim == 2 ? kVtkQuadOrder : kVtkHexOrder;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    os << nc;
    for (int k = 0; k < nc; ++k) os << " " << mesh.cell_nodes(c)[order[k]];
    os << "\n";
  }
  os << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (int c = 0; c < mesh.n_cells(); ++c) os << (dim == 2 ? 9 : 12) << "\n";
  os << "POINT_DATA " << mesh.n_nodes() << "\n";
  os << "VECTORS displacement double\n";
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const Vec<dim> u = field.value(n);
    os << format_double(u[0]) << " " << format_double(u[1]) << " "
       << format_double(dim == 3 ? u[dim - 1] : 0.0) << "\n";
  }
  if (!os) throw std::runtime_error("write_vtk: write failed for " + path);
}

void write_network(const VesselNetwork &net, std::ostream &os) {
  if (net.dim == 2) {
    for (const auto &v : net.vessels2d) {
      os << "SEGMENT 1\n";
      os << format_double(v.center[0]) << " " << format_double(v.center[1]) << " "
         << format_double(0.0) << " " << format_double(v.radius) << " "
         << format_double(v.pressure) << "\n";
    }
    return;
  }
  for (const auto &seg : net.segments) {
    os << "SEGMENT " << seg.points.size() << "\n";
    for (std::size_t i = 0; i < seg.points.size(); ++i) {
      const Vec<3> &p = seg.points[i];
      os << format_double(p[0]) << " " << format_double(p[1]) << " " << format_double(p[2])
         << " " << format_double(seg.radii[i]) << " " << format_double(seg.pressures[i])
         << "\n";
    }
  }
}

void write_network(const VesselNetwork &net, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_network: cannot open " + path);
  write_network(net, os);
  if (!os) throw std::runtime_error("write_network: write failed for " + path);
}

VesselNetwork read_network(std::istream &is, int dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("read_network: dim must be 2 or 3");
  VesselNetwork net;
  net.dim = dim;
  std::string tag;
  while (is >> tag) {
    if (tag != "SEGMENT") throw std::runtime_error("read_network: expected SEGMENT, got " + tag);
    std::size_t n = 0;
    if (!(is >> n) || n < 1) throw std::runtime_error("read_network: bad point count");
    VesselSegment3D seg;
    for (std::size_t i = 0; i < n; ++i) {
      double x, y, z, r, p;
      if (!(is >> x >> y >> z >> r >> p))
        throw std::runtime_error("read_network: malformed point line");
      seg.points.push_back({x, y, z});
      seg.radii.push_back(r);
      seg.pressures.push_back(p);
    }
    if (dim == 2) {
      if (n != 1) throw std::runtime_error("read_network: 2D blocks must have one point");
      net.vessels2d.push_back(
          {{seg.points[0][0], seg.points[0][1]}, seg.radii[0], seg.pressures[0]});
    } else {
      seg.validate();
      net.segments.push_back(std::move(seg));
    }
  }
  return net;
}

VesselNetwork read_network(const std::string &path, int dim) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_network: cannot open " + path);
  return read_network(is, dim);
}

template void write_vtk<2>(const Mesh<2> &, const Field<2> &, const std::string &);
template void write_vtk<3>(const Mesh<3> &, const Field<3> &, const std::string &);

}  // namespace vtfem
