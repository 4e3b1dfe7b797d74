#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace advprobe {

struct TsvRow {
    int line_number = 0;
    std::vector<std::string> fields;
};

// Tab-separated reader. Blank lines and lines starting with '#' are skipped.
// When expected_fields > 0, rows with a different arity raise ParseError
// naming the line.
std::vector<TsvRow> read_tsv(const std::filesystem::path& path, int expected_fields = 0);

} // namespace advprobe
