#ifndef EITLAB_IO_HPP
#define EITLAB_IO_HPP

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace eitlab {

/// Shortest round-trip-safe text for a double: "%.17g", dot decimal.
std::string format_number(double value);

/// CSV builder: header row first, LF line endings, numbers via format_number.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    CsvWriter& row(std::initializer_list<double> values);
    CsvWriter& row(const std::vector<std::string>& cells);

    std::size_t rows() const noexcept { return rows_; }
    const std::string& str() const noexcept { return text_; }

private:
    std::size_t columns_;
    std::size_t rows_ = 0;
    std::string text_;
};

/// Writes bytes verbatim (binary mode), creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

} // namespace eitlab

#endif
