#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace dtaas::csv {

/// Reals are written with 9 significant digits everywhere in the output files.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// Rounds to the value a CSV reader recovers from format_real().
inline double quantize(double v) { return std::strtod(format_real(v).c_str(), nullptr); }

class Writer {
  public:
    explicit Writer(std::ostream& out) : out_(out) {}

    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((emit(cells, first)), ...);
        out_ << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        bool first = true;
        for (const auto& c : cells) emit(c, first);
        out_ << '\n';
    }

  private:
    template <typename T>
    void emit(const T& value, bool& first) {
        if (!first) out_ << ',';
        first = false;
        if constexpr (std::is_floating_point_v<T>) {
            out_ << format_real(static_cast<double>(value));
        } else if constexpr (std::is_same_v<T, bool>) {
            out_ << (value ? 1 : 0);
        } else {
            out_ << value;
        }
    }

    std::ostream& out_;
};

/// Header-indexed table read fully into memory.
class Table {
  public:
    static Table read(std::istream& in) {
        Table t;
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto cells = split(line);
            if (header) {
                for (std::size_t i = 0; i < cells.size(); ++i) t.index_[cells[i]] = i;
                t.columns_ = std::move(cells);
                header = false;
            } else {
                if (cells.size() != t.columns_.size()) {
                    throw std::runtime_error("row " + std::to_string(t.rows_.size() + 1) + " has " +
                                             std::to_string(cells.size()) + " cells, expected " +
                                             std::to_string(t.columns_.size()));
                }
                t.rows_.push_back(std::move(cells));
            }
        }
        if (header) throw std::runtime_error("empty CSV");
        return t;
    }

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }
    bool has(std::string_view column) const { return index_.count(std::string(column)) != 0; }

    const std::string& text(std::size_t row, std::string_view column) const {
        auto it = index_.find(std::string(column));
        if (it == index_.end()) throw std::runtime_error("missing column '" + std::string(column) + "'");
        return rows_.at(row)[it->second];
    }

    double real(std::size_t row, std::string_view column) const {
        const auto& s = text(row, column);
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size()) {
            throw std::runtime_error("column '" + std::string(column) + "' row " + std::to_string(row + 1) +
                                     ": not a number: '" + s + "'");
        }
        return v;
    }

    std::int64_t integer(std::size_t row, std::string_view column) const {
        const auto& s = text(row, column);
        char* end = nullptr;
        const long long v = std::strtoll(s.c_str(), &end, 10);
        if (s.empty() || end != s.c_str() + s.size()) {
            throw std::runtime_error("column '" + std::string(column) + "' row " + std::to_string(row + 1) +
                                     ": not an integer: '" + s + "'");
        }
        return v;
    }

  private:
    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                out.push_back(std::move(cur));
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        out.push_back(std::move(cur));
        return out;
    }

    std::vector<std::string> columns_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace dtaas::csv
