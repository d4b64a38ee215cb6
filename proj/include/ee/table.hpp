#pragma once
// Column-typed result tables with CSV (RFC 4180, floats at 9 significant
// digits) and JSON writers, a CSV reader, and mean / SE / 95% band aggregation.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ee::io {

// Empty, text, integer, real or flag.
using Cell = std::variant<std::monostate, std::string, std::int64_t, double, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  explicit Table(std::vector<std::string> cols = {}) : columns(std::move(cols)) {}
  // Throws when the row length differs from the column count.
  void add_row(std::vector<Cell> row);
  std::size_t column_index(const std::string& name) const;  // throws when absent
};

// %.9g; nan, inf and -inf spelled out.
std::string format_real(double v);
std::string format_cell(const Cell& c);

void write_csv(std::ostream& os, const Table& t);
// Array of objects; non-finite reals become null.
void write_json(std::ostream& os, const Table& t);

// Every field comes back as text (empty fields as empty cells). Throws
// std::runtime_error on unbalanced quotes or ragged rows.
Table read_csv(std::istream& is);

// Numeric value of a cell: integers, reals, flags as 0/1, text parsed as a
// number or true/false. False when the cell is empty or not numeric.
bool numeric_value(const Cell& c, double& out);

// Groups rows by `by` (in first-appearance order) and reports, for each value
// column, n, mean, standard error (empty for n = 1) and mean -+ 1.96 SE.
// Empty `values` selects every column outside `by` whose non-empty cells are
// all numeric, except rep and trial.
Table summarize(const Table& in, std::span<const std::string> by,
                std::span<const std::string> values = {});

}  // namespace ee::io
