#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace weaves {

/// One solve: problem parameters, the method used, and what it cost.
struct PerformanceRecord {
  std::vector<double> params;
  std::string method;
  bool success = true;
  double time = 0.0;
  double evaluations = 0.0;
};

/// Append-only store of solves, persisted as CSV with a header row
/// `<param>...,method,outcome,time,evaluations`.
class PerformanceDb {
 public:
  explicit PerformanceDb(std::vector<std::string> param_names = {}) : params_(std::move(param_names)) {}

  void append(PerformanceRecord r);
  const std::vector<PerformanceRecord>& records() const { return records_; }
  const std::vector<std::string>& param_names() const { return params_; }

  std::string to_csv() const;
  static PerformanceDb from_csv(std::string_view text);
  /// Appends the rows not yet written to `path` (creating it with a header).
  void save(const std::string& path) const;
  static PerformanceDb load(const std::string& path);

 private:
  std::vector<std::string> params_;
  std::vector<PerformanceRecord> records_;
};

/// Grid coordinates of a cell: index of each parameter value among the
/// distinct values of that dimension.
using GridCell = std::vector<std::size_t>;

/// Axis-aligned box of grid cells, inclusive on both ends.
struct GridBox {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
  std::vector<double> lo_value;
  std::vector<double> hi_value;

  bool contains(const GridCell& c) const;
  std::size_t volume() const;
};

struct RecommendationRegion {
  std::string preferred;
  std::string other;
  double confidence = 0.9;
  std::vector<std::vector<double>> axes;  // distinct values per dimension
  std::vector<GridBox> boxes;
  std::set<GridCell> cells;  // union of the boxes

  bool covers(const std::vector<double>& params) const;
};

/// Fraction of paired solves in which `a` beats `b`: a succeeds and either
/// b fails or a is cheaper. Records are paired in order of appearance.
double preference_fraction(const std::vector<const PerformanceRecord*>& a, const std::vector<const PerformanceRecord*>& b);

/// Greedy box induction over the parameter grid. A cell qualifies when its
/// paired preference fraction for `a` reaches `confidence`; boxes are grown
/// from the lowest unassigned qualifying cell one dimension at a time and
/// never overlap. Throws EmptyDatabase, InvalidArgument.
RecommendationRegion mine_regions(const PerformanceDb& db, std::string_view a, std::string_view b, double confidence);

}  // namespace weaves
