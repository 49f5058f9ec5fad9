#include "eitlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "eitlab/errors.hpp"

namespace eitlab {

std::string format_number(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size())
{
    if (header.empty())
        throw InvalidArgument("CSV header must not be empty");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i)
            text_ += ',';
        text_ += header[i];
    }
    text_ += '\n';
}

CsvWriter& CsvWriter::row(std::initializer_list<double> values)
{
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values)
        cells.push_back(format_number(v));
    return row(cells);
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& cells)
{
    if (cells.size() != columns_)
        throw InvalidArgument("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(columns_));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
    ++rows_;
    return *this;
}

void write_text_file(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw InvalidArgument("cannot open " + path.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os)
        throw InvalidArgument("write to " + path.string() + " failed");
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw InvalidArgument("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace eitlab
