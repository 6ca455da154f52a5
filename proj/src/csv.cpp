#include "scenalloc/csv.hpp"

#include <fstream>
#include <sstream>

#include "scenalloc/errors.hpp"

namespace scenalloc {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string strip_cr(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
    return s;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, strfmt("cannot open '%s'", path.c_str()));

    CsvTable table;
    std::string line;
    bool have_header = false;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (!have_header && !line.empty() && line[0] == '#') {
            table.comments.push_back(line);
            continue;
        }
        if (line.empty()) continue;
        if (!have_header) {
            table.header = split_line(line);
            have_header = true;
            continue;
        }
        auto cells = split_line(line);
        if (cells.size() != table.header.size())
            throw Error(ErrorKind::Schema,
                        strfmt("%s:%zu: expected %zu columns, found %zu", path.c_str(), lineno,
                               table.header.size(), cells.size()));
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw Error(ErrorKind::Schema, strfmt("'%s' has no header row", path.c_str()));
    return table;
}

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (const auto& c : comments) out << c << "\n";
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    write_text_file(path, out.str());
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, strfmt("cannot open '%s'", path.c_str()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, strfmt("cannot write '%s'", path.c_str()));
    out << contents;
    if (!out) throw Error(ErrorKind::Io, strfmt("write to '%s' failed", path.c_str()));
}

}  // namespace scenalloc
