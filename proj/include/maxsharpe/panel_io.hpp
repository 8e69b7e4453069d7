#pragma once

// Wide CSV panels: a header row, an optional leading date column (ISO-8601 or
// YYYYMM) and one column of decimal returns per asset.

#include "maxsharpe/moments.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace maxsharpe {

struct PanelFile {
    std::string path;
    // When unset, the first column is treated as dates if its header is blank or
    // date-like, or if every cell in it looks like a date.
    std::optional<std::string> date_column;
    // Per-period risk-free series; excluded from the assets.
    std::optional<std::string> rfr_column;
};

struct LoadedPanel {
    ReturnsPanel panel;
    std::vector<std::string> dates;   // empty when there is no date column
    std::optional<Eigen::VectorXd> rfr;  // from rfr_column
    std::string date_header;

    // Returns minus the rfr column, or the panel itself if there is none.
    ReturnsPanel excess() const;
};

LoadedPanel load_panel(const PanelFile& file);
LoadedPanel parse_panel(std::istream& in, const PanelFile& file = {});

// Writes doubles at 17 significant digits, so parse_panel(write_panel(p)) == p.
void write_panel(std::ostream& out, const ReturnsPanel& panel, const std::vector<std::string>& dates = {},
                 const std::string& date_header = "date");

// Splits CSV text into records (RFC-4180 quoting, CRLF or LF line ends).
std::vector<std::vector<std::string>> read_csv_records(std::istream& in);
// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view text);
std::string format_double(double value);

// 64-bit FNV-1a of the file bytes, as 16 hex digits.
std::string file_hash(const std::string& path);

}  // namespace maxsharpe
