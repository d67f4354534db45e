#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace spinlens {

/// Minimal CSV writer: header row, '.' decimal point, 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& operator<<(double value);
    CsvWriter& operator<<(long long value);
    CsvWriter& operator<<(int value) { return *this << static_cast<long long>(value); }
    CsvWriter& operator<<(const std::string& value);
    void row(std::initializer_list<double> values);
    void end_row();

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    void separator();

    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_ = 0;
    std::size_t column_ = 0;
};

/// Formats a double with full round-trip precision in the C locale.
std::string format_double(double value);

/// Splits one CSV line on commas (no quoting support).
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace spinlens
