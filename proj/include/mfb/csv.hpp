#pragma once

#include <concepts>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mfb {

/// CSV file whose first line is `# digest=<hex>` followed by the column header.
/// Throws IoError when the file cannot be written.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& digest, const std::vector<std::string>& columns);

    CsvWriter& cell(double value);
    template <std::unsigned_integral U>
    CsvWriter& cell(U value) {
        separator();
        out_ << value;
        return *this;
    }
    CsvWriter& cell(const std::string& text);
    CsvWriter& cell(const char* text) { return cell(std::string(text)); }
    void end_row();

    void close();

private:
    void separator();

    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& text);

}  // namespace mfb
