#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cesnet::csv {

/// Splits one CSV record. Handles double-quoted fields with `""` escapes.
std::vector<std::string> split(std::string_view line);

/// Quotes a field if it contains a separator, quote or newline.
std::string escape(std::string_view field);

/// Line-oriented reader over a stream. Blank lines are skipped.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Next non-blank record, or nullopt at end of stream.
    std::optional<std::vector<std::string>> next();
    /// 1-based physical line number of the last record returned.
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
};

/// Index of `name` (case-insensitive) in a header row, or nullopt.
std::optional<std::size_t> find_column(const std::vector<std::string>& header, std::string_view name);

std::string lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace cesnet::csv
