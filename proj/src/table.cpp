#include "ee/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <istream>
#include <stdexcept>

#include <json.hpp>

namespace ee::io {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("row has " + std::to_string(row.size()) + " cells, table has " +
                                std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::invalid_argument("no column named '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_cell(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  } visitor;
  return std::visit(visitor, c);
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

void write_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote(fields[i]);
  }
  os << "\r\n";
}

}  // namespace

void write_csv(std::ostream& os, const Table& t) {
  write_line(os, t.columns);
  std::vector<std::string> fields;
  for (const auto& row : t.rows) {
    fields.clear();
    for (const auto& c : row) fields.push_back(format_cell(c));
    write_line(os, fields);
  }
}

void write_json(std::ostream& os, const Table& t) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Cell& c = row[i];
      nlohmann::ordered_json v;
      if (const auto* s = std::get_if<std::string>(&c)) v = *s;
      else if (const auto* n = std::get_if<std::int64_t>(&c)) v = *n;
      else if (const auto* b = std::get_if<bool>(&c)) v = *b;
      else if (const auto* d = std::get_if<double>(&c)) {
        // Round through the CSV text so both formats carry the same value.
        if (std::isfinite(*d)) v = std::stod(format_real(*d));
      }
      obj[t.columns[i]] = std::move(v);
    }
    arr.push_back(std::move(obj));
  }
  os << arr.dump(2) << '\n';
}

Table read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false, any = false;
  char ch;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  while (is.get(ch)) {
    any = true;
    if (in_quotes) {
      if (ch == '"') {
        if (is.peek() == '"') {
          is.get(ch);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      if (field_started) throw std::runtime_error("malformed CSV: quote inside an unquoted field");
      in_quotes = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\r') {
      if (is.peek() == '\n') is.get(ch);
      end_record();
    } else if (ch == '\n') {
      end_record();
    } else {
      field += ch;
      field_started = true;
    }
  }
  if (in_quotes) throw std::runtime_error("malformed CSV: unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  if (!any || records.empty()) throw std::runtime_error("malformed CSV: no header row");

  Table t(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.columns.size())
      throw std::runtime_error("malformed CSV: row " + std::to_string(r) + " has " +
                               std::to_string(records[r].size()) + " fields, expected " +
                               std::to_string(t.columns.size()));
    std::vector<Cell> row;
    for (auto& f : records[r]) row.emplace_back(f.empty() ? Cell{} : Cell{std::move(f)});
    t.rows.push_back(std::move(row));
  }
  return t;
}

bool numeric_value(const Cell& c, double& out) {
  if (const auto* d = std::get_if<double>(&c)) return out = *d, true;
  if (const auto* n = std::get_if<std::int64_t>(&c)) return out = static_cast<double>(*n), true;
  if (const auto* b = std::get_if<bool>(&c)) return out = *b ? 1.0 : 0.0, true;
  const auto* s = std::get_if<std::string>(&c);
  if (!s || s->empty()) return false;
  if (*s == "true") return out = 1.0, true;
  if (*s == "false") return out = 0.0, true;
  if (*s == "nan") return out = std::nan(""), true;
  if (*s == "inf") return out = INFINITY, true;
  if (*s == "-inf") return out = -INFINITY, true;
  const char* first = s->data();
  const char* last = first + s->size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

Table summarize(const Table& in, std::span<const std::string> by,
                std::span<const std::string> values) {
  std::vector<std::size_t> key_cols;
  for (const auto& b : by) key_cols.push_back(in.column_index(b));

  std::vector<std::size_t> value_cols;
  if (!values.empty()) {
    for (const auto& v : values) value_cols.push_back(in.column_index(v));
  } else {
    for (std::size_t c = 0; c < in.columns.size(); ++c) {
      const auto& name = in.columns[c];
      if (name == "rep" || name == "trial") continue;
      if (std::find(key_cols.begin(), key_cols.end(), c) != key_cols.end()) continue;
      bool numeric = false, all = true;
      for (const auto& row : in.rows) {
        double x;
        if (std::holds_alternative<std::monostate>(row[c])) continue;
        if (numeric_value(row[c], x)) numeric = true;
        else all = false;
      }
      if (numeric && all) value_cols.push_back(c);
    }
  }

  std::vector<std::string> cols(by.begin(), by.end());
  for (const char* s : {"column", "n", "mean", "se", "band_lo", "band_hi"}) cols.emplace_back(s);
  Table out(cols);

  std::map<std::vector<std::string>, std::size_t> group_of;
  std::vector<std::vector<std::string>> keys;
  std::vector<std::vector<std::vector<double>>> data;  // [group][value column] -> samples
  for (const auto& row : in.rows) {
    std::vector<std::string> key;
    for (auto c : key_cols) key.push_back(format_cell(row[c]));
    auto [it, fresh] = group_of.emplace(key, keys.size());
    if (fresh) {
      keys.push_back(key);
      data.emplace_back(value_cols.size());
    }
    for (std::size_t v = 0; v < value_cols.size(); ++v) {
      double x;
      if (numeric_value(row[value_cols[v]], x)) data[it->second][v].push_back(x);
      else if (!std::holds_alternative<std::monostate>(row[value_cols[v]]))
        throw std::runtime_error("non-numeric value in column '" + in.columns[value_cols[v]] + "'");
    }
  }

  for (std::size_t g = 0; g < keys.size(); ++g) {
    for (std::size_t v = 0; v < value_cols.size(); ++v) {
      const auto& xs = data[g][v];
      std::vector<Cell> row(keys[g].begin(), keys[g].end());
      row.emplace_back(in.columns[value_cols[v]]);
      row.emplace_back(static_cast<std::int64_t>(xs.size()));
      if (xs.empty()) {
        row.insert(row.end(), 4, Cell{});
      } else {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        row.emplace_back(mean);
        if (xs.size() < 2) {
          row.insert(row.end(), 3, Cell{});
        } else {
          double ss = 0.0;
          for (double x : xs) ss += (x - mean) * (x - mean);
          const double n = static_cast<double>(xs.size());
          const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
          row.emplace_back(se);
          row.emplace_back(mean - 1.96 * se);
          row.emplace_back(mean + 1.96 * se);
        }
      }
      out.add_row(std::move(row));
    }
  }
  return out;
}

}  // namespace ee::io
