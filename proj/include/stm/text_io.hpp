#pragma once

#include <concepts>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stm/field.hpp"
#include "stm/quantization.hpp"
#include "stm/spline.hpp"

namespace stm {

/// Shortest decimal text that parses back to the identical double.
std::string format_number(double value);

template <std::integral T>
std::string format_number(T value) {
    return std::to_string(value);
}

double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

/// Plain comma-separated table; no quoting, fields never contain commas.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string str() const;
    std::size_t column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Field model text format:
///
///     # comments and blank lines are ignored
///     width <w>
///     height <h>
///     a <amplitude> <mean_x> <mean_y> <sigma>     (one line per wide component)
///     b <amplitude> <mean_x> <mean_y> <sigma>     (one line per narrow component)
std::string serialize_field(const SyntheticFieldModel& model);
SyntheticFieldModel parse_field(std::string_view text, std::string_view source = "<field>");

/// Columns: timestamp_index,sensor_id,x,y,value
CsvTable observations_csv(const SensorDeployment& deployment, const ObservationSet& observations);
/// Columns: i,j,x,y,value
CsvTable reconstruction_csv(const Reconstruction& recon);
/// Columns: index,level,range_min,range_max
CsvTable levels_csv(const ContourLevelSet& levels);
/// Columns: bin,lower,upper,density
CsvTable pdf_csv(const EmpiricalPdf& pdf);

}  // namespace stm
