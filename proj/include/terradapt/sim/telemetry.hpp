#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace terradapt::sim {

// Column-named table of per-tick records.
class Telemetry {
public:
    Telemetry() = default;
    explicit Telemetry(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void append(std::vector<double> row);
    [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
    [[nodiscard]] const std::vector<std::vector<double>>& rows() const { return rows_; }
    [[nodiscard]] std::size_t size() const { return rows_.size(); }
    [[nodiscard]] int column(const std::string& name) const;  // throws if absent
    [[nodiscard]] std::vector<double> series(const std::string& name) const;

    // Header row then one row per record, values with 17 significant digits.
    void write_csv(const std::filesystem::path& path) const;
    static Telemetry read_csv(const std::filesystem::path& path);

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

} // namespace terradapt::sim
