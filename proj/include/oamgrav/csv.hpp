#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

#include "oamgrav/errors.hpp"

namespace oamgrav::csv {

/// Shortest round-trip decimal form; locale independent, so output is
/// byte-stable across runs and machines.
inline std::string format(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc{}) throw NumericalError("csv: failed to format a number");
    return std::string(buf, res.ptr);
}

inline std::string format(std::int64_t v) { return std::to_string(v); }
inline std::string format(int v) { return std::to_string(v); }

using Cell = std::variant<double, std::int64_t, std::string>;

/// Comma-separated table with '#'-prefixed metadata lines before the header.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_comment(std::string_view line) { comments_.emplace_back(line); }

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size()) throw InvalidArgument("csv: row width does not match the header");
        rows_.push_back(std::move(row));
    }

    std::size_t rows() const { return rows_.size(); }

    void write(std::ostream& os) const {
        for (const auto& c : comments_) os << "# " << c << '\n';
        for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) os << ',';
                std::visit(
                    [&](const auto& v) {
                        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::string>)
                            os << v;
                        else
                            os << format(v);
                    },
                    row[i]);
            }
            os << '\n';
        }
    }

    std::string str() const {
        std::ostringstream os;
        write(os);
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("csv: cannot open " + path + " for writing");
        write(f);
        if (!f) throw Error("csv: write to " + path + " failed");
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::string> comments_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace oamgrav::csv
