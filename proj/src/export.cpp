#include "idfield/export.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "idfield/errors.hpp"

namespace idfield {
namespace {

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> coordinate_names(int q) {
  if (q == 1) return {"x"};
  if (q == 2) return {"x", "y"};
  std::vector<std::string> names;
  for (int i = 1; i <= q; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

void check_sizes(const std::vector<FieldRealization>& fields, const TargetGrid& grid) {
  for (const auto& f : fields)
    if (f.values.size() != grid.size())
      throw UsageError("export: realization size does not match the target grid");
}

}  // namespace

std::map<std::string, std::string> metadata(const std::vector<FieldRealization>& fields,
                                            const TargetGrid& grid) {
  std::map<std::string, std::string> m;
  m["realizations"] = std::to_string(fields.size());
  m["points"] = std::to_string(grid.size());
  m["resolution"] = std::to_string(grid.resolution);
  m["dim"] = std::to_string(grid.dim);
  m["window"] = num(grid.window);
  if (!fields.empty()) {
    const auto& f = fields.front();
    m["method"] = f.method;
    m["measure"] = f.measure;
    m["kernel"] = f.kernel;
    m["n"] = std::to_string(f.n);
    m["epsilon"] = num(f.epsilon);
    m["seed"] = std::to_string(f.seed);
    m["first_stream"] = std::to_string(f.stream);
    m["summands"] = std::to_string(f.counters.summands);
    m["random_variables"] = std::to_string(f.counters.random_variables);
  }
  return m;
}

void export_csv(const std::filesystem::path& path, const std::vector<FieldRealization>& fields,
                const TargetGrid& grid) {
  check_sizes(fields, grid);
  auto out = open_out(path);
  for (const auto& [k, v] : metadata(fields, grid)) out << "# " << k << '=' << v << '\n';
  const auto names = coordinate_names(grid.dim);
  for (const auto& name : names) out << name << ',';
  out << "value\n";
  const auto points = grid.points();
  for (std::size_t r = 0; r < fields.size(); ++r) {
    if (fields.size() > 1) out << "# realization=" << r << '\n';
    for (std::size_t p = 0; p < points.size(); ++p) {
      for (double c : points[p]) out << num(c) << ',';
      out << num(fields[r].values[p]) << '\n';
    }
  }
  check_written(out, path);
}

void export_binary(const std::filesystem::path& path, const std::vector<FieldRealization>& fields,
                   const TargetGrid& grid) {
  check_sizes(fields, grid);
  {
    auto out = open_out(path, std::ios::binary);
    for (const auto& f : fields) {
      for (double v : f.values) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char*>(bytes), 8);
      }
    }
    check_written(out, path);
  }
  auto meta_path = path;
  meta_path += ".meta";
  auto meta = open_out(meta_path);
  meta << "format=float64le\n";
  for (const auto& [k, v] : metadata(fields, grid)) meta << k << '=' << v << '\n';
  check_written(meta, meta_path);
}

void export_gnuplot(const std::filesystem::path& path, const std::vector<FieldRealization>& fields,
                    const TargetGrid& grid) {
  check_sizes(fields, grid);
  if (grid.dim != 2) throw UsageError("gnuplot export needs a two-dimensional grid");
  auto out = open_out(path);
  for (const auto& [k, v] : metadata(fields, grid)) out << "# " << k << '=' << v << '\n';
  const auto m = static_cast<std::size_t>(grid.resolution);
  for (std::size_t r = 0; r < fields.size(); ++r) {
    if (r > 0) out << "\n\n";
    // Rows follow the second coordinate so `plot ... matrix` shows x across.
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (i > 0) out << ' ';
        out << num(fields[r].values[i * m + j]);
      }
      out << '\n';
    }
  }
  check_written(out, path);
}

void export_fields(const std::filesystem::path& path, const std::string& format,
                   const std::vector<FieldRealization>& fields, const TargetGrid& grid) {
  if (format == "csv") export_csv(path, fields, grid);
  else if (format == "bin") export_binary(path, fields, grid);
  else if (format == "gnuplot") export_gnuplot(path, fields, grid);
  else throw UsageError("unknown export format '" + format + "'");
}

void export_report(const std::filesystem::path& path, const ValidationReport& report) {
  auto out = open_out(path);
  out << "# mean=" << num(report.mean) << '\n'
      << "# variance=" << num(report.variance) << '\n'
      << "# max_deviation=" << num(report.max_deviation) << '\n'
      << "# tolerance=" << num(report.tolerance) << '\n'
      << "# pass=" << (report.pass ? "true" : "false") << '\n'
      << "# attempts=" << report.attempts << '\n'
      << "# n=" << report.n << '\n'
      << "lag,estimate,theory\n";
  for (std::size_t i = 0; i < report.lags.size(); ++i)
    out << num(report.lags[i]) << ',' << num(report.covariance[i]) << ',' << num(report.theory[i]) << '\n';
  check_written(out, path);
}

BinaryFields read_binary(const std::filesystem::path& path) {
  BinaryFields result;
  auto meta_path = path;
  meta_path += ".meta";
  std::ifstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot read " + meta_path.string());
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) result.meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  unsigned char bytes[8];
  while (in.read(reinterpret_cast<char*>(bytes), 8)) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    result.values.push_back(std::bit_cast<double>(bits));
  }
  if (in.gcount() != 0) throw std::runtime_error("truncated binary file " + path.string());
  return result;
}

}  // namespace idfield
