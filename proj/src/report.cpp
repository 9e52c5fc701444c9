#include "folia/report.hpp"

#include <cstdio>
#include <fstream>

namespace folia {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string quote_csv(const std::string& s) {
    bool needs = false;
    for (char c : s)
        if (c == ',' || c == '"' || c == '\n' || c == '\r') needs = true;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::string cell_to_string(const CsvCell& cell) {
    if (std::holds_alternative<std::string>(cell))
        return quote_csv(std::get<std::string>(cell));
    if (std::holds_alternative<double>(cell))
        return format_double(std::get<double>(cell));
    return std::to_string(std::get<long long>(cell));
}

}  // namespace

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ += ',';
        out_ += quote_csv(header[i]);
    }
    out_ += "\r\n";
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
    if (cells.size() != width_)
        throw ConfigError("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ += ',';
        out_ += cell_to_string(cells[i]);
    }
    out_ += "\r\n";
}

void atomic_write(const std::filesystem::path& path, const std::string& data) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw ConfigError("cannot open for writing: " + tmp.string());
        os.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!os) throw ConfigError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void CsvWriter::save(const std::filesystem::path& path) const {
    atomic_write(path, out_);
}

PlotWriter::PlotWriter(std::string comment_header) {
    out_ = "# " + comment_header + "\n";
}

void PlotWriter::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out_ += ' ';
        out_ += format_double(values[i]);
    }
    out_ += '\n';
}

void PlotWriter::save(const std::filesystem::path& path) const {
    atomic_write(path, out_);
}

}  // namespace folia
