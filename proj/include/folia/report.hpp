// folia: deterministic CSV / JSON / plot-data emission (atomic writes).
#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "folia/types.hpp"

namespace folia {

using CsvCell = std::variant<std::string, double, long long>;

// RFC-4180 quoting; doubles rendered with %.17g so reruns are byte-identical.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<CsvCell>& cells);
    std::string str() const { return out_; }
    // Write-then-rename.
    void save(const std::filesystem::path& path) const;

private:
    std::string out_;
    std::size_t width_;
};

std::string format_double(double v);
void atomic_write(const std::filesystem::path& path, const std::string& data);

// Two-column (or more) whitespace-separated plot data, gnuplot-compatible.
class PlotWriter {
public:
    explicit PlotWriter(std::string comment_header);
    void row(const std::vector<double>& values);
    void save(const std::filesystem::path& path) const;

private:
    std::string out_;
};

}  // namespace folia
