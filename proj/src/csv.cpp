#include "spinlens/csv.hpp"

#include <cstdio>
#include <sstream>

#include "spinlens/error.hpp"

namespace spinlens {

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path), columns_(header.size())
{
    if (!out_)
        throw InvalidSpec("cannot open output file " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::separator()
{
    if (column_ > 0)
        out_ << ',';
    ++column_;
}

CsvWriter& CsvWriter::operator<<(double value)
{
    separator();
    out_ << format_double(value);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long value)
{
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& value)
{
    separator();
    out_ << value;
    return *this;
}

void CsvWriter::row(std::initializer_list<double> values)
{
    for (double v : values)
        *this << v;
    end_row();
}

void CsvWriter::end_row()
{
    if (column_ != columns_)
        throw std::logic_error("CsvWriter: row width does not match header");
    out_ << '\n';
    column_ = 0;
}

} // namespace spinlens
