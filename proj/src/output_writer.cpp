#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "msar/analysis.hpp"
#include "msar/io_util.hpp"

namespace msar {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string() + ": cannot create directory: " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(tmp.string() + ": write failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(path.string() + ": rename failed");
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

void check_size(const PixelGrid& grid, std::size_t n, const char* what) {
  if (n != grid.size()) throw ContractError(std::string(what) + ": value count does not match the grid");
}

std::string fmt_vec(const Vec2& v) { return format_double(v.x()) + "," + format_double(v.y()); }

}  // namespace

void write_csv_grid(const fs::path& path, const PixelGrid& grid, std::span<const double> values) {
  check_size(grid, values.size(), "csv grid");
  std::string out = "iy";
  for (std::size_t ix = 0; ix < grid.nx; ++ix) out += ",ix" + std::to_string(ix);
  out += '\n';
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    out += std::to_string(iy);
    for (std::size_t ix = 0; ix < grid.nx; ++ix) out += "," + format_double(values[grid.index_of(ix, iy)]);
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<double> read_csv_grid(const fs::path& path, const PixelGrid& grid) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty grid file");
  std::vector<double> values(grid.size());
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    if (!std::getline(in, line)) throw IoError(path.string() + ": missing grid row " + std::to_string(iy));
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != grid.nx + 1) throw IoError(path.string() + ": wrong column count in row " + std::to_string(iy));
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const auto& f = fields[ix + 1];
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc{}) throw IoError(path.string() + ": bad number '" + f + "'");
      values[grid.index_of(ix, iy)] = v;
    }
  }
  return values;
}

void write_pgm16(const fs::path& path, const PixelGrid& grid, std::span<const double> values) {
  check_size(grid, values.size(), "pgm");
  double max = 0.0;
  for (double v : values) max = std::max(max, v);
  std::string out = "P5\n" + std::to_string(grid.nx) + " " + std::to_string(grid.ny) + "\n65535\n";
  for (std::size_t row = 0; row < grid.ny; ++row) {
    const std::size_t iy = grid.ny - 1 - row;
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const double v = values[grid.index_of(ix, iy)];
      const double scaled = max > 0.0 ? std::clamp(v / max, 0.0, 1.0) * 65535.0 : 0.0;
      const auto level = static_cast<unsigned>(std::lround(scaled));
      out.push_back(static_cast<char>((level >> 8) & 0xffu));
      out.push_back(static_cast<char>(level & 0xffu));
    }
  }
  atomic_write(path, out);
  fs::path scale = path;
  scale += ".scale.txt";
  atomic_write(scale, "max_magnitude = " + format_double(max) + "\nlevels = 65535\n");
}

void write_velocity_map_csv(const fs::path& path, const PixelGrid& grid, const std::vector<Vec2>& velocity_map,
                            std::span<const double> magnitudes) {
  check_size(grid, velocity_map.size(), "velocity map");
  check_size(grid, magnitudes.size(), "velocity map");
  std::string out = "p,x,y,v_x,v_y,abs_s\n";
  for (std::size_t p = 0; p < grid.size(); ++p)
    out += std::to_string(p) + "," + fmt_vec(grid.center(p)) + "," + fmt_vec(velocity_map[p]) + "," +
           format_double(magnitudes[p]) + "\n";
  atomic_write(path, out);
}

void write_detections_csv(const fs::path& path, const PixelGrid& grid, const std::vector<Detection>& detections) {
  std::string out = "p,x,y,magnitude,n,v_x,v_y\n";
  for (const auto& d : detections)
    out += std::to_string(d.pixel) + "," + fmt_vec(grid.center(d.pixel)) + "," + format_double(d.magnitude) +
           "," + std::to_string(d.hypothesis) + "," + fmt_vec(d.velocity) + "\n";
  atomic_write(path, out);
}

void write_kspace_csv(const fs::path& path, const std::vector<KSpaceSample>& samples) {
  std::string out = "m,k,l,t,k_x,k_y\n";
  for (const auto& s : samples)
    out += std::to_string(s.row) + "," + std::to_string(s.pulse) + "," + std::to_string(s.rx) + "," +
           format_double(s.time) + "," + fmt_vec(s.k) + "\n";
  atomic_write(path, out);
}

void write_velocity_grid_csv(const fs::path& path, const VelocityGrid& grid) {
  std::string out = "n,v_x,v_y\n";
  for (std::size_t n = 0; n < grid.size(); ++n) out += std::to_string(n) + "," + fmt_vec(grid[n]) + "\n";
  atomic_write(path, out);
}

void write_solver_trace_csv(const fs::path& path, const SolverDiagnostics& diag) {
  std::string out = "iteration,objective,residual_norm,l1_norm\n";
  for (std::size_t i = 0; i < diag.objective_trace.size(); ++i)
    out += std::to_string(i) + "," + format_double(diag.objective_trace[i]) + "," +
           format_double(diag.residual_trace[i]) + "," + format_double(diag.l1_trace[i]) + "\n";
  atomic_write(path, out);
}

void write_cube_slice_csv(const fs::path& path, const PixelGrid& grid, const SpaceVelocityCube& cube,
                          std::size_t hypothesis) {
  const auto slice = cube.slice(hypothesis);
  std::vector<double> mag(slice.size());
  std::transform(slice.begin(), slice.end(), mag.begin(), [](Complex z) { return std::abs(z); });
  write_csv_grid(path, grid, mag);
}

void write_metrics(const fs::path& path, const MetricsReport& report) { atomic_write(path, report.to_text()); }

}  // namespace msar
