#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "idfield/field.hpp"
#include "idfield/harness.hpp"

namespace idfield {

// Header metadata written with every export.
std::map<std::string, std::string> metadata(const std::vector<FieldRealization>& fields,
                                            const TargetGrid& grid);

// `# key=value` header, then one block of coordinate,value rows per
// realization.
void export_csv(const std::filesystem::path& path, const std::vector<FieldRealization>& fields,
                const TargetGrid& grid);
// Little-endian float64 values, realization-major, with `path.meta` sidecar.
void export_binary(const std::filesystem::path& path, const std::vector<FieldRealization>& fields,
                   const TargetGrid& grid);
// gnuplot `matrix` blocks (q = 2 only), separated by two blank lines.
void export_gnuplot(const std::filesystem::path& path, const std::vector<FieldRealization>& fields,
                    const TargetGrid& grid);

void export_fields(const std::filesystem::path& path, const std::string& format,
                   const std::vector<FieldRealization>& fields, const TargetGrid& grid);

void export_report(const std::filesystem::path& path, const ValidationReport& report);

struct BinaryFields {
  std::map<std::string, std::string> meta;
  std::vector<double> values;
};
BinaryFields read_binary(const std::filesystem::path& path);

}  // namespace idfield
