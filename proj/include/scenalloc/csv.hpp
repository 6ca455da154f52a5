#pragma once

#include <string>
#include <vector>

namespace scenalloc {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // cells, same width as header
    std::vector<std::string> comments;           // leading '#' lines, kept verbatim
};

// Reads a simple comma-separated file. Leading lines starting with '#' are
// collected as comments; every data row must have the header's column count.
CsvTable read_csv(const std::string& path);

// Round-trip-exact double formatting ("%.17g"), shared by every writer so
// repeated runs produce byte-identical files.
std::string fmt_double(double x);

void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace scenalloc
