#include "terradapt/sim/telemetry.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "terradapt/common/error.hpp"

namespace terradapt::sim {

void Telemetry::append(std::vector<double> row) {
    if (row.size() != columns_.size()) throw DimensionError("telemetry row width does not match columns");
    rows_.push_back(std::move(row));
}

int Telemetry::column(const std::string& name) const {
    auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) throw DimensionError("telemetry has no column '" + name + "'");
    return static_cast<int>(it - columns_.begin());
}

std::vector<double> Telemetry::series(const std::string& name) const {
    const auto c = static_cast<std::size_t>(column(name));
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r[c]);
    return out;
}

void Telemetry::write_csv(const std::filesystem::path& path) const {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < columns_.size(); ++i) std::fprintf(f, "%s%s", i ? "," : "", columns_[i].c_str());
    std::fprintf(f, "\n");
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) std::fprintf(f, "%s%.17g", i ? "," : "", r[i]);
        std::fprintf(f, "\n");
    }
    const bool ok = std::ferror(f) == 0;
    std::fclose(f);
    if (!ok) throw IoError("failed writing " + path.string());
}

Telemetry Telemetry::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open telemetry " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError(path.string() + ": empty telemetry file");
    std::vector<std::string> cols;
    std::stringstream hs(line);
    for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
    Telemetry t(cols);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.c_str();
        char* end = nullptr;
        while (true) {
            row.push_back(std::strtod(p, &end));
            if (end == p) throw IoError(path.string() + ": malformed telemetry value");
            if (*end != ',') break;
            p = end + 1;
        }
        t.append(std::move(row));
    }
    return t;
}

} // namespace terradapt::sim
