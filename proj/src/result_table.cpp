#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

#include "fsa/experiment.hpp"

namespace fsa {

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

Cell Cell::number(double value, int decimals) {
    if (std::isnan(value)) throw std::domain_error("result cell cannot hold NaN");
    if (std::isinf(value)) return Cell(Kind::inf);
    Cell c(Kind::number);
    c.number_ = value;
    c.decimals_ = decimals;
    return c;
}

Cell Cell::integer(std::int64_t value) {
    Cell c(Kind::integer);
    c.integer_ = value;
    return c;
}

Cell Cell::text(std::string value) {
    Cell c(Kind::text);
    c.text_ = std::move(value);
    return c;
}

double Cell::as_double() const {
    switch (kind_) {
        case Kind::number: return number_;
        case Kind::integer: return static_cast<double>(integer_);
        case Kind::inf: return HUGE_VAL;
        default: throw std::logic_error("cell is not numeric");
    }
}

std::string Cell::render() const {
    switch (kind_) {
        case Kind::number: {
            // Shortest round-trip form unless a fixed precision was asked for.
            if (decimals_ < 0) return fmt::format("{}", number_);
            std::string s = fmt::format("{:.{}f}", number_, decimals_);
            if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
            return s;
        }
        case Kind::integer: return fmt::format("{}", integer_);
        case Kind::text: return csv_escape(text_);
        case Kind::inf: return "inf";
        case Kind::infeasible: return "infeasible";
    }
    return {};
}

ResultTable::ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw std::invalid_argument("result table needs at least one column");
}

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) {
        throw std::invalid_argument(
            fmt::format("row has {} cells, table has {} columns", row.size(), columns_.size()));
    }
    rows_.push_back(std::move(row));
}

void ResultTable::add_metadata(std::string key, std::string value) {
    metadata_.emplace_back(std::move(key), std::move(value));
}

std::size_t ResultTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i] == name) return i;
    }
    throw std::out_of_range("no column named " + name);
}

void ResultTable::write_csv(std::ostream& out) const {
    for (const auto& [key, value] : metadata_) out << "# " << key << ": " << value << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << csv_escape(columns_[i]);
    out << '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i].render();
        out << '\n';
    }
}

std::string ResultTable::to_csv() const {
    std::ostringstream out;
    write_csv(out);
    return out.str();
}

}  // namespace fsa
