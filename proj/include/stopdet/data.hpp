#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stopdet/pointset.hpp"

namespace stopdet {

enum class ColumnKind { numeric, categorical };

struct CsvOptions {
  bool header = false;
  // Strips quote characters and collapses runs of blanks before parsing.
  bool pre_clean = false;
};

struct RawColumn {
  ColumnKind kind = ColumnKind::numeric;
  std::string name;
  std::vector<double> numeric;         // kind == numeric
  std::vector<std::int32_t> codes;     // kind == categorical: level index per row
  std::vector<std::string> levels;     // first-appearance order
};

struct RawTable {
  std::size_t n_rows = 0;
  std::vector<RawColumn> columns;
};

// Schema file: one line per column, "numeric" or "categorical".
std::vector<ColumnKind> load_schema(const std::string& path);

RawTable load_csv(const std::string& path, const std::vector<ColumnKind>& schema,
                  const CsvOptions& opts = {});

struct ColumnOrigin {
  std::size_t source_column = 0;
  std::int32_t one_hot_level = -1;  // -1 for numeric columns
};

struct Dataset {
  PointSet points;
  std::vector<ColumnOrigin> column_meta;
  bool standardized = false;
};

// Expands each categorical column with L levels into L indicator columns.
Dataset one_hot(const RawTable& table);

// Per column: subtract the sample mean and divide by the population standard
// deviation (denominator N). Constant columns are centered and left with
// divisor 1.
Dataset standardize(const Dataset& ds);

// Seeded Fisher-Yates row permutation; the same seed reproduces the order.
Dataset permute(const Dataset& ds, std::uint64_t seed);

// i.i.d. standard normal rows.
Dataset synth_gaussian(std::size_t n, std::size_t dim, std::uint64_t seed);

}  // namespace stopdet
