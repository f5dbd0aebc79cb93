#pragma once

// Canonical numeric formatting and the CSV-with-manifest table format shared
// by the CLI subcommands: a single '#'-prefixed JSON metadata line, a header
// row, then data rows. 12-significant-digit shortest formatting makes emitted
// files byte-stable under re-read/re-emit.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace spinphoton {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

class TableWriter {
public:
    explicit TableWriter(std::ostream& os) : os_(os) {}

    void manifest(const nlohmann::json& meta) { os_ << "# " << meta.dump() << "\n"; }

    void header(const std::vector<std::string>& columns) { write_row(columns); }

    void row(const std::vector<std::string>& cells) { write_row(cells); }

private:
    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << "\n";
    }

    std::ostream& os_;
};

}  // namespace spinphoton
