#include "mfb/csv.hpp"

#include "mfb/config.hpp"
#include "mfb/error.hpp"

namespace mfb {

std::string csv_escape(const std::string& text) {
    if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& digest,
                     const std::vector<std::string>& columns)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(columns.size()) {
    if (!out_) throw Error(ErrorCode::io_error, "cannot write '" + path.string() + "'");
    out_ << "# digest=" << digest << '\n';
    for (const auto& c : columns) cell(c);
    end_row();
}

void CsvWriter::separator() {
    if (filled_ > 0) out_ << ',';
    ++filled_;
}

CsvWriter& CsvWriter::cell(double value) {
    separator();
    out_ << format_number(value);
    return *this;
}

CsvWriter& CsvWriter::cell(const std::string& text) {
    separator();
    out_ << csv_escape(text);
    return *this;
}

void CsvWriter::end_row() {
    if (filled_ != columns_) {
        throw Error(ErrorCode::invalid_argument, path_.string() + ": row has " + std::to_string(filled_) +
                                                     " cells, header has " + std::to_string(columns_));
    }
    out_ << '\n';
    filled_ = 0;
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::io_error, "failed writing '" + path_.string() + "'");
}

}  // namespace mfb
