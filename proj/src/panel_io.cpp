#include "maxsharpe/panel_io.hpp"

#include "maxsharpe/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace maxsharpe {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool valid_month(std::string_view mm) {
    if (!all_digits(mm) || mm.size() != 2) return false;
    const int m = (mm[0] - '0') * 10 + (mm[1] - '0');
    return m >= 1 && m <= 12;
}

// YYYYMM, YYYY-MM or YYYY-MM-DD.
bool looks_like_date(std::string_view s) {
    if (s.size() == 6 && all_digits(s)) return valid_month(s.substr(4, 2));
    if (s.size() != 7 && s.size() != 10) return false;
    if (!all_digits(s.substr(0, 4)) || s[4] != '-' || !valid_month(s.substr(5, 2))) return false;
    if (s.size() == 7) return true;
    return s[7] == '-' && all_digits(s.substr(8, 2));
}

bool date_like_header(const std::string& h) {
    const std::string l = lower(h);
    return l.empty() || l == "date" || l == "month" || l == "yyyymm" || l == "period" || l == "time";
}

std::string location(std::size_t row, const std::string& column, std::size_t col) {
    std::ostringstream s;
    s << "row " << row << ", column " << col + 1 << " ('" << column << "')";
    return s.str();
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column, std::size_t col) {
    const std::string cell = trim(raw);
    if (cell.empty()) throw DataError("blank cell at " + location(row, column, col));
    double value = 0.0;
    const char* first = cell.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), value);
    if (ec == std::errc::result_out_of_range) throw DataError("value out of range at " + location(row, column, col));
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError("cannot parse '" + cell + "' as a number at " + location(row, column, col));
    if (!std::isfinite(value)) throw DataError("non-finite value at " + location(row, column, col));
    return value;
}

}  // namespace

ReturnsPanel LoadedPanel::excess() const {
    if (!rfr) return panel;
    Eigen::MatrixXd x = panel.values().colwise() - *rfr;
    return ReturnsPanel(std::move(x), panel.labels(), panel.periods_per_year());
}

std::vector<std::vector<std::string>> read_csv_records(std::istream& in) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool first_char = true;
    std::size_t line = 1;
    char c = 0;
    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        // Skip lines that are completely empty.
        if (!(record.size() == 1 && record[0].empty() && !field_started)) records.push_back(std::move(record));
        record.clear();
        field_started = false;
    };
    while (in.get(c)) {
        if (first_char) {
            first_char = false;
            // UTF-8 byte order mark.
            if (static_cast<unsigned char>(c) == 0xEF) {
                char bom[2];
                if (in.read(bom, 2) && static_cast<unsigned char>(bom[0]) == 0xBB &&
                    static_cast<unsigned char>(bom[1]) == 0xBF)
                    continue;
                throw DataError("invalid byte sequence at the start of the file");
            }
        }
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) throw DataError("stray quote on line " + std::to_string(line));
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                record.push_back(std::move(field));
                field.clear();
                field_started = true;
                break;
            case '\r':
                if (in.peek() == '\n') in.get(c);
                [[fallthrough]];
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (in_quotes) throw DataError("unterminated quoted field starting before line " + std::to_string(line));
    if (field_started || !field.empty() || !record.empty()) end_record();
    return records;
}

LoadedPanel parse_panel(std::istream& in, const PanelFile& file) {
    const auto records = read_csv_records(in);
    if (records.empty()) throw DataError("panel file is empty");
    std::vector<std::string> header;
    for (const auto& h : records[0]) header.push_back(trim(h));
    const std::size_t width = header.size();
    const std::size_t rows = records.size() - 1;
    if (rows < 2) throw DataError("panel needs at least 2 data rows, found " + std::to_string(rows));
    for (std::size_t r = 1; r < records.size(); ++r)
        if (records[r].size() != width)
            throw DataError("row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                            " fields, header has " + std::to_string(width));

    auto find_column = [&](const std::string& name, const char* what) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError(std::string(what) + " column '" + name + "' not found in header");
        return static_cast<std::size_t>(it - header.begin());
    };

    std::optional<std::size_t> date_col;
    if (file.date_column) {
        date_col = find_column(*file.date_column, "date");
    } else if (width > 1) {
        bool all_dates = true;
        for (std::size_t r = 1; r < records.size() && all_dates; ++r) all_dates = looks_like_date(trim(records[r][0]));
        if (date_like_header(header[0]) || all_dates) date_col = 0;
    }
    std::optional<std::size_t> rfr_col;
    if (file.rfr_column) rfr_col = find_column(*file.rfr_column, "risk-free");

    std::vector<std::size_t> asset_cols;
    std::set<std::string> seen;
    for (std::size_t c = 0; c < width; ++c) {
        if (c == date_col || c == rfr_col) continue;
        if (header[c].empty()) throw DataError("asset column " + std::to_string(c + 1) + " has a blank name");
        if (!seen.insert(header[c]).second) throw DataError("duplicate asset name '" + header[c] + "'");
        asset_cols.push_back(c);
    }
    if (asset_cols.empty()) throw DataError("panel has no asset columns");

    Eigen::MatrixXd values(static_cast<Index>(rows), static_cast<Index>(asset_cols.size()));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& rec = records[r + 1];
        for (std::size_t j = 0; j < asset_cols.size(); ++j) {
            const std::size_t c = asset_cols[j];
            values(static_cast<Index>(r), static_cast<Index>(j)) = parse_cell(rec[c], r + 1, header[c], c);
        }
    }
    std::vector<std::string> dates;
    std::string date_header;
    std::optional<Eigen::VectorXd> rfr;
    if (date_col) {
        date_header = header[*date_col];
        for (std::size_t r = 0; r < rows; ++r) {
            std::string d = trim(records[r + 1][*date_col]);
            if (!looks_like_date(d))
                throw DataError("unrecognised date '" + d + "' at " + location(r + 1, header[*date_col], *date_col));
            dates.push_back(std::move(d));
        }
    }
    if (rfr_col) {
        rfr.emplace(static_cast<Index>(rows));
        for (std::size_t r = 0; r < rows; ++r)
            (*rfr)[static_cast<Index>(r)] = parse_cell(records[r + 1][*rfr_col], r + 1, header[*rfr_col], *rfr_col);
    }
    std::vector<std::string> labels;
    for (std::size_t c : asset_cols) labels.push_back(header[c]);
    // Monthly stamps imply 12 periods per year; daily dates leave it unknown.
    const double periods = !dates.empty() && dates.front().size() != 10 ? 12.0 : 0.0;
    return LoadedPanel{ReturnsPanel(std::move(values), std::move(labels), periods), std::move(dates), std::move(rfr),
                       std::move(date_header)};
}

LoadedPanel load_panel(const PanelFile& file) {
    std::ifstream in(file.path, std::ios::binary);
    if (!in) throw DataError("cannot open panel file '" + file.path + "'");
    return parse_panel(in, file);
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_panel(std::ostream& out, const ReturnsPanel& panel, const std::vector<std::string>& dates,
                 const std::string& date_header) {
    const bool with_dates = !dates.empty();
    if (with_dates && static_cast<Index>(dates.size()) != panel.n())
        throw UsageError("date count does not match the number of rows");
    if (with_dates) out << csv_field(date_header) << ',';
    for (Index j = 0; j < panel.k(); ++j) out << (j ? "," : "") << csv_field(panel.labels()[static_cast<std::size_t>(j)]);
    out << '\n';
    for (Index i = 0; i < panel.n(); ++i) {
        if (with_dates) out << csv_field(dates[static_cast<std::size_t>(i)]) << ',';
        for (Index j = 0; j < panel.k(); ++j) out << (j ? "," : "") << format_double(panel.values()(i, j));
        out << '\n';
    }
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << h;
    return s.str();
}

}  // namespace maxsharpe
