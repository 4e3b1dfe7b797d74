#include "advprobe/tsv.hpp"

#include <fstream>

#include "advprobe/errors.hpp"
#include "advprobe/text.hpp"

namespace advprobe {

std::vector<TsvRow> read_tsv(const std::filesystem::path& path, int expected_fields) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open TSV file: " + path.string());
    std::vector<TsvRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = text::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        TsvRow row;
        row.line_number = lineno;
        row.fields = text::split(line, '\t');
        if (expected_fields > 0 && static_cast<int>(row.fields.size()) != expected_fields) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(expected_fields) + " tab-separated fields, got " +
                             std::to_string(row.fields.size()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace advprobe
