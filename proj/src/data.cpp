#include "stopdet/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "stopdet/errors.hpp"
#include "stopdet/rng.hpp"

namespace stopdet {

namespace {

std::string trim(const std::string& s) {
  std::size_t lo = 0;
  std::size_t hi = s.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
  return s.substr(lo, hi - lo);
}

std::string clean_line(const std::string& line) {
  std::string out;
  out.reserve(line.size());
  bool in_blank = false;
  for (const char c : line) {
    if (c == '\'' || c == '"') continue;
    if (c == ' ' || c == '\t') {
      in_blank = true;
      continue;
    }
    if (in_blank && !out.empty() && c != ',' && out.back() != ',') out.push_back(' ');
    in_blank = false;
    out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(begin)));
      break;
    }
    fields.push_back(trim(line.substr(begin, comma - begin)));
    begin = comma + 1;
  }
  return fields;
}

double parse_numeric(const std::string& field, std::size_t row, std::size_t col) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (begin != end && *begin == '+') ++begin;  // from_chars rejects a leading +
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    std::ostringstream msg;
    msg << "load_csv: cannot parse numeric value '" << field << "' at row " << row + 1
        << ", column " << col + 1;
    throw std::invalid_argument(msg.str());
  }
  return value;
}

}  // namespace

std::vector<ColumnKind> load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_schema: cannot open " + path);
  std::vector<ColumnKind> kinds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string token = trim(line);
    if (token.empty()) continue;
    if (token == "numeric") {
      kinds.push_back(ColumnKind::numeric);
    } else if (token == "categorical") {
      kinds.push_back(ColumnKind::categorical);
    } else {
      throw std::invalid_argument("load_schema: unknown column kind '" + token +
                                  "' on line " + std::to_string(line_no));
    }
  }
  if (kinds.empty()) throw std::invalid_argument("load_schema: empty schema " + path);
  return kinds;
}

RawTable load_csv(const std::string& path, const std::vector<ColumnKind>& schema,
                  const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open " + path);
  if (schema.empty()) throw std::invalid_argument("load_csv: empty schema");

  RawTable table;
  table.columns.resize(schema.size());
  std::vector<std::unordered_map<std::string, std::int32_t>> level_index(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) table.columns[c].kind = schema[c];

  std::string line;
  std::size_t row = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (opts.pre_clean) line = clean_line(line);
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (opts.header && !saw_header) {
      saw_header = true;
      if (fields.size() != schema.size()) {
        throw std::invalid_argument("load_csv: header has " + std::to_string(fields.size()) +
                                    " columns, schema expects " +
                                    std::to_string(schema.size()));
      }
      for (std::size_t c = 0; c < fields.size(); ++c) table.columns[c].name = fields[c];
      continue;
    }
    if (fields.size() != schema.size()) {
      throw std::invalid_argument("load_csv: row " + std::to_string(row + 1) + " has " +
                                  std::to_string(fields.size()) + " columns, expected " +
                                  std::to_string(schema.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      RawColumn& column = table.columns[c];
      if (column.kind == ColumnKind::numeric) {
        column.numeric.push_back(parse_numeric(fields[c], row, c));
      } else {
        auto [it, inserted] =
            level_index[c].try_emplace(fields[c], static_cast<std::int32_t>(column.levels.size()));
        if (inserted) column.levels.push_back(fields[c]);
        column.codes.push_back(it->second);
      }
    }
    ++row;
  }
  if (row == 0) throw std::invalid_argument("load_csv: no data rows in " + path);
  table.n_rows = row;
  return table;
}

Dataset one_hot(const RawTable& table) {
  if (table.n_rows == 0) throw std::invalid_argument("one_hot: empty table");
  std::size_t out_dim = 0;
  for (const RawColumn& column : table.columns) {
    out_dim += column.kind == ColumnKind::numeric ? 1 : column.levels.size();
  }

  Dataset ds;
  ds.points = PointSet(table.n_rows, out_dim);
  ds.column_meta.reserve(out_dim);

  std::size_t out_col = 0;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const RawColumn& column = table.columns[c];
    if (column.kind == ColumnKind::numeric) {
      for (std::size_t r = 0; r < table.n_rows; ++r) {
        ds.points.row(r)[out_col] = column.numeric[r];
      }
      ds.column_meta.push_back({c, -1});
      ++out_col;
    } else {
      for (std::int32_t level = 0; level < static_cast<std::int32_t>(column.levels.size());
           ++level) {
        for (std::size_t r = 0; r < table.n_rows; ++r) {
          ds.points.row(r)[out_col] = column.codes[r] == level ? 1.0 : 0.0;
        }
        ds.column_meta.push_back({c, level});
        ++out_col;
      }
    }
  }
  return ds;
}

Dataset standardize(const Dataset& ds) {
  if (ds.standardized) throw std::invalid_argument("standardize: dataset already standardized");
  const std::size_t n = ds.points.size();
  const std::size_t dim = ds.points.dim();
  Dataset out;
  out.points = ds.points;
  out.column_meta = ds.column_meta;
  out.standardized = true;

  for (std::size_t c = 0; c < dim; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += out.points.row(r)[c];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = out.points.row(r)[c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    const double divisor = sd > 0.0 ? sd : 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      out.points.row(r)[c] = (out.points.row(r)[c] - mean) / divisor;
    }
  }
  return out;
}

Dataset permute(const Dataset& ds, std::uint64_t seed) {
  const std::size_t n = ds.points.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(order[i - 1], order[j]);
  }

  Dataset out;
  out.points = PointSet(n, ds.points.dim());
  out.column_meta = ds.column_meta;
  out.standardized = ds.standardized;
  for (std::size_t r = 0; r < n; ++r) {
    const auto src = ds.points.row(order[r]);
    std::copy(src.begin(), src.end(), out.points.row(r).begin());
  }
  return out;
}

Dataset synth_gaussian(std::size_t n, std::size_t dim, std::uint64_t seed) {
  if (n == 0 || dim == 0) {
    throw std::invalid_argument("synth_gaussian: n and dim must be positive");
  }
  Dataset ds;
  ds.points = PointSet(n, dim);
  Rng rng(seed);
  for (double& v : ds.points.values()) v = rng.next_gaussian();
  for (std::size_t c = 0; c < dim; ++c) ds.column_meta.push_back({c, -1});
  return ds;
}

}  // namespace stopdet
