#include "stallpred/flight_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "stallpred/errors.hpp"
#include "stallpred/text.hpp"

namespace stallpred {

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

double parse_cell(std::string_view cell, std::size_t row, std::string_view column) {
    cell = trim(cell);
    double value = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
        throw ParseError("flight csv: non-numeric cell in column '" + std::string(column) +
                         "' at row " + std::to_string(row));
    return value;
}

}  // namespace

TimeSeries parse_flight_csv_text(std::string_view text, const std::string& id) {
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& out) -> bool {
        if (pos >= text.size()) return false;
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        out = text.substr(pos, nl - pos);
        pos = nl + 1;
        return true;
    };

    std::string_view header;
    if (!next_line(header)) throw FormatError("flight csv: empty file");
    const auto names = split_row(header);

    // Column lookup: index in the row for each required channel.
    std::vector<int> param_col(kNumFlightParams, -1);
    int warning_col = -1;
    int time_col = -1;
    for (std::size_t c = 0; c < names.size(); ++c) {
        const std::string_view name = trim(names[c]);
        if (name == kWarningColumn) warning_col = static_cast<int>(c);
        if (name == kTimeColumn) time_col = static_cast<int>(c);
        for (std::size_t f = 0; f < kNumFlightParams; ++f)
            if (name == kFlightParamNames[f]) param_col[f] = static_cast<int>(c);
    }
    for (std::size_t f = 0; f < kNumFlightParams; ++f)
        if (param_col[f] < 0)
            throw SchemaError(std::string("flight csv: missing column '") +
                              kFlightParamNames[f] + "'");
    if (warning_col < 0)
        throw SchemaError(std::string("flight csv: missing column '") + kWarningColumn + "'");

    TimeSeries ts;
    ts.id = id;
    Vector times;
    std::string_view line;
    std::size_t row = 1;  // header was row 1
    while (next_line(line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() != names.size())
            throw FormatError("flight csv: row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(names.size()));
        for (std::size_t f = 0; f < kNumFlightParams; ++f)
            ts.params[f].push_back(parse_cell(cells[static_cast<std::size_t>(param_col[f])],
                                              row, kFlightParamNames[f]));
        const double w =
            parse_cell(cells[static_cast<std::size_t>(warning_col)], row, kWarningColumn);
        if (w != 0.0 && w != 1.0)
            throw ValidationError("flight csv: stall_warning must be 0 or 1 at row " +
                                  std::to_string(row));
        ts.stall_warning.push_back(w != 0.0 ? 1 : 0);
        if (time_col >= 0)
            times.push_back(parse_cell(cells[static_cast<std::size_t>(time_col)], row,
                                       kTimeColumn));
    }

    if (!times.empty() && times.size() >= 2) {
        const double dt = times[1] - times[0];
        if (!(dt > 0.0)) throw FormatError("flight csv: time_s must be strictly increasing");
        for (std::size_t i = 2; i < times.size(); ++i) {
            const double d = times[i] - times[i - 1];
            if (std::fabs(d - dt) > 1e-9 * std::max(1.0, std::fabs(dt)))
                throw FormatError("flight csv: non-uniform time base at row " +
                                  std::to_string(i + 2));
        }
        ts.sample_rate_hz = 1.0 / dt;
    }
    return ts;
}

TimeSeries parse_flight_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("flight csv: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_flight_csv_text(buf.str(), path);
}

std::string flight_to_csv(const TimeSeries& ts, bool with_time) {
    std::string out;
    if (with_time) out += std::string(kTimeColumn) + ",";
    for (std::size_t f = 0; f < kNumFlightParams; ++f) {
        out += kFlightParamNames[f];
        out += ',';
    }
    out += kWarningColumn;
    out += '\n';
    const double dt = 1.0 / ts.sample_rate_hz;
    for (std::size_t t = 0; t < ts.length(); ++t) {
        if (with_time) {
            out += fmt_double(static_cast<double>(t) * dt);
            out += ',';
        }
        for (std::size_t f = 0; f < kNumFlightParams; ++f) {
            out += fmt_double(ts.params[f][t]);
            out += ',';
        }
        out += ts.stall_warning[t] ? '1' : '0';
        out += '\n';
    }
    return out;
}

void write_flight_csv(const TimeSeries& ts, const std::string& path, bool with_time) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("flight csv: cannot write " + path);
    out << flight_to_csv(ts, with_time);
    if (!out) throw IoError("flight csv: write failed for " + path);
}

}  // namespace stallpred
