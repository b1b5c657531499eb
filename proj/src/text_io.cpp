#include "stm/text_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "stm/errors.hpp"

namespace stm {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> words(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t k = 0;
    while (k < s.size()) {
        while (k < s.size() && (s[k] == ' ' || s[k] == '\t' || s[k] == '\r')) ++k;
        const std::size_t start = k;
        while (k < s.size() && s[k] != ' ' && s[k] != '\t' && s[k] != '\r') ++k;
        if (k > start) out.push_back(s.substr(start, k - start));
    }
    return out;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) throw Error("could not format a number");
    return std::string(buf, end);
}

double parse_double(std::string_view text) {
    text = trim(text);
    if (text == "nan") return std::nan("");
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
        throw ParseError("'" + std::string(text) + "' is not a number");
    }
    return value;
}

long long parse_integer(std::string_view text) {
    text = trim(text);
    long long value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
        throw ParseError("'" + std::string(text) + "' is not an integer");
    }
    return value;
}

std::string CsvTable::str() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& row) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out.push_back(',');
            out += row[k];
        }
        out.push_back('\n');
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return out;
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == name) return k;
    }
    throw ParseError("missing column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    bool first = true;
    std::size_t line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<std::string> cells;
        for (auto cell : split(line, ',')) cells.emplace_back(cell);
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != table.header.size()) {
                throw ParseError("csv line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                 " fields, header has " + std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    const auto tmp = std::filesystem::path(path).concat(".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string serialize_field(const SyntheticFieldModel& model) {
    std::string out = "# synthetic field model: <set> <amplitude> <mean_x> <mean_y> <sigma>\n";
    out += "width " + format_number(model.field_width) + "\n";
    out += "height " + format_number(model.field_height) + "\n";
    auto emit = [&out](char set, const GaussianComponent& c) {
        out.push_back(set);
        for (double v : {c.amplitude, c.mean_x, c.mean_y, c.sigma}) {
            out.push_back(' ');
            out += format_number(v);
        }
        out.push_back('\n');
    };
    for (const auto& c : model.components_a) emit('a', c);
    for (const auto& c : model.components_b) emit('b', c);
    return out;
}

SyntheticFieldModel parse_field(std::string_view text, std::string_view source) {
    SyntheticFieldModel model;
    bool have_width = false, have_height = false;
    std::size_t line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto w = words(line);
        if (w.empty()) continue;
        try {
            if (w[0] == "width" || w[0] == "height") {
                if (w.size() != 2) throw ParseError("expected '" + std::string(w[0]) + " <value>'");
                (w[0] == "width" ? model.field_width : model.field_height) = parse_double(w[1]);
                (w[0] == "width" ? have_width : have_height) = true;
            } else if (w[0] == "a" || w[0] == "b") {
                if (w.size() != 5) throw ParseError("expected '<set> <amplitude> <mean_x> <mean_y> <sigma>'");
                const GaussianComponent c{parse_double(w[1]), parse_double(w[2]), parse_double(w[3]),
                                          parse_double(w[4])};
                (w[0] == "a" ? model.components_a : model.components_b).push_back(c);
            } else {
                throw ParseError("unknown record '" + std::string(w[0]) + "'");
            }
        } catch (const ParseError& e) {
            throw ParseError(where + e.what());
        }
    }
    if (!have_width || !have_height) {
        throw ParseError(std::string(source) + ": field model needs 'width' and 'height' records");
    }
    try {
        model.validate();
    } catch (const Error& e) {
        throw ParseError(std::string(source) + ": " + e.what());
    }
    return model;
}

CsvTable observations_csv(const SensorDeployment& deployment, const ObservationSet& observations) {
    const auto index = index_sensors(deployment);
    CsvTable t;
    t.header = {"timestamp_index", "sensor_id", "x", "y", "value"};
    for (const auto& r : observations.readings) {
        const auto it = index.find(r.sensor_id);
        if (it == index.end()) throw ContractError("reading from unknown sensor " + std::to_string(r.sensor_id));
        const Sensor& s = deployment.sensors[it->second];
        t.rows.push_back({format_number(observations.timestamp_index), format_number(r.sensor_id),
                          format_number(s.x), format_number(s.y), format_number(r.value)});
    }
    return t;
}

CsvTable reconstruction_csv(const Reconstruction& recon) {
    CsvTable t;
    t.header = {"i", "j", "x", "y", "value"};
    for (std::size_t i = 0; i < recon.grid.p; ++i) {
        for (std::size_t j = 0; j < recon.grid.q; ++j) {
            t.rows.push_back({format_number(i), format_number(j), format_number(recon.grid.x_at(i)),
                              format_number(recon.grid.y_at(j)), format_number(recon.at(i, j))});
        }
    }
    return t;
}

CsvTable levels_csv(const ContourLevelSet& levels) {
    CsvTable t;
    t.header = {"index", "level", "range_min", "range_max"};
    for (std::size_t i = 0; i < levels.levels.size(); ++i) {
        t.rows.push_back({format_number(i + 1), format_number(levels.levels[i]), format_number(levels.range_min),
                          format_number(levels.range_max)});
    }
    return t;
}

CsvTable pdf_csv(const EmpiricalPdf& pdf) {
    CsvTable t;
    t.header = {"bin", "lower", "upper", "density"};
    for (std::size_t k = 0; k < pdf.densities.size(); ++k) {
        t.rows.push_back({format_number(k), format_number(pdf.bin_edges[k]), format_number(pdf.bin_edges[k + 1]),
                          format_number(pdf.densities[k])});
    }
    return t;
}

}  // namespace stm
