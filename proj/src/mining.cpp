#include "weaves/mining.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "weaves/error.hpp"

namespace weaves {

void PerformanceDb::append(PerformanceRecord r) {
  if (!params_.empty() && r.params.size() != params_.size())
    throw Error(ErrorCode::InvalidArgument, "record has " + std::to_string(r.params.size()) + " parameters, expected " +
                                                std::to_string(params_.size()));
  records_.push_back(std::move(r));
}

namespace {
std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double number(const std::string& s, std::size_t line) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw Error(ErrorCode::CorruptImage, "line " + std::to_string(line) + ": '" + s + "' is not a number");
  return v;
}
}  // namespace

std::string PerformanceDb::to_csv() const {
  std::ostringstream os;
  for (const auto& p : params_) os << p << ',';
  os << "method,outcome,time,evaluations\n";
  for (const auto& r : records_) {
    for (double v : r.params) os << fmt(v) << ',';
    os << r.method << ',' << (r.success ? "success" : "failure") << ',' << fmt(r.time) << ',' << fmt(r.evaluations)
       << '\n';
  }
  return os.str();
}

PerformanceDb PerformanceDb::from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyDatabase, "no header row");
  auto header = split(line);
  if (header.size() < 4 || header[header.size() - 4] != "method")
    throw Error(ErrorCode::CorruptImage, "header must end with method,outcome,time,evaluations");
  std::size_t np = header.size() - 4;
  PerformanceDb db(std::vector<std::string>(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(np)));
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != header.size()) throw Error(ErrorCode::CorruptImage, "line " + std::to_string(n) + ": wrong field count");
    PerformanceRecord r;
    for (std::size_t i = 0; i < np; ++i) r.params.push_back(number(f[i], n));
    r.method = f[np];
    if (f[np + 1] != "success" && f[np + 1] != "failure")
      throw Error(ErrorCode::CorruptImage, "line " + std::to_string(n) + ": outcome must be success or failure");
    r.success = f[np + 1] == "success";
    r.time = number(f[np + 2], n);
    r.evaluations = number(f[np + 3], n);
    db.append(std::move(r));
  }
  return db;
}

void PerformanceDb::save(const std::string& path) const {
  std::size_t existing = 0;
  {
    std::ifstream in(path);
    if (in) {
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      existing = from_csv(text).records().size();
    }
  }
  if (existing > records_.size()) throw Error(ErrorCode::InvalidArgument, "'" + path + "' has more rows than this database");
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot append to '" + path + "'");
  std::string csv = to_csv();
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  if (existing == 0 && out.tellp() == 0) out << line << '\n';
  std::size_t i = 0;
  while (std::getline(rows, line))
    if (i++ >= existing) out << line << '\n';
}

PerformanceDb PerformanceDb::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_csv(text);
}

bool GridBox::contains(const GridCell& c) const {
  for (std::size_t d = 0; d < c.size(); ++d)
    if (c[d] < lo[d] || c[d] > hi[d]) return false;
  return true;
}

std::size_t GridBox::volume() const {
  std::size_t v = 1;
  for (std::size_t d = 0; d < lo.size(); ++d) v *= hi[d] - lo[d] + 1;
  return v;
}

bool RecommendationRegion::covers(const std::vector<double>& params) const {
  GridCell c;
  for (std::size_t d = 0; d < params.size(); ++d) {
    auto it = std::lower_bound(axes[d].begin(), axes[d].end(), params[d]);
    if (it == axes[d].end() || *it != params[d]) return false;
    c.push_back(static_cast<std::size_t>(it - axes[d].begin()));
  }
  return cells.count(c) > 0;
}

double preference_fraction(const std::vector<const PerformanceRecord*>& a,
                           const std::vector<const PerformanceRecord*>& b) {
  std::size_t pairs = std::min(a.size(), b.size());
  if (pairs == 0) return 0.0;
  std::size_t wins = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto& x = *a[i];
    const auto& y = *b[i];
    if (x.success && (!y.success || x.time < y.time)) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(pairs);
}

RecommendationRegion mine_regions(const PerformanceDb& db, std::string_view a, std::string_view b, double confidence) {
  if (!(confidence > 0.5 && confidence <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "confidence must lie in (0.5, 1]");
  std::vector<const PerformanceRecord*> relevant;
  for (const auto& r : db.records())
    if (r.method == a || r.method == b) relevant.push_back(&r);
  if (relevant.empty()) throw Error(ErrorCode::EmptyDatabase, "no records for " + std::string(a) + "/" + std::string(b));

  RecommendationRegion region;
  region.preferred = std::string(a);
  region.other = std::string(b);
  region.confidence = confidence;
  const std::size_t dims = relevant.front()->params.size();
  region.axes.resize(dims);
  for (const auto* r : relevant)
    for (std::size_t d = 0; d < dims; ++d) region.axes[d].push_back(r->params[d]);
  for (auto& axis : region.axes) {
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }
  auto cell_of = [&](const PerformanceRecord& r) {
    GridCell c(dims);
    for (std::size_t d = 0; d < dims; ++d)
      c[d] = static_cast<std::size_t>(std::lower_bound(region.axes[d].begin(), region.axes[d].end(), r.params[d]) -
                                      region.axes[d].begin());
    return c;
  };
  std::map<GridCell, std::pair<std::vector<const PerformanceRecord*>, std::vector<const PerformanceRecord*>>> by_cell;
  for (const auto* r : relevant) {
    auto& slot = by_cell[cell_of(*r)];
    (r->method == a ? slot.first : slot.second).push_back(r);
  }
  std::set<GridCell> qualifying;
  for (const auto& [cell, runs] : by_cell)
    if (preference_fraction(runs.first, runs.second) >= confidence) qualifying.insert(cell);

  std::set<GridCell> assigned;
  auto usable = [&](const GridCell& c) { return qualifying.count(c) && !assigned.count(c); };
  auto box_usable = [&](const GridBox& box) {
    // Enumerate the box's cells with an odometer.
    GridCell c = box.lo;
    for (;;) {
      if (!usable(c)) return false;
      std::size_t d = 0;
      while (d < dims && c[d] == box.hi[d]) {
        c[d] = box.lo[d];
        ++d;
      }
      if (d == dims) return true;
      ++c[d];
    }
  };
  for (const auto& seed : qualifying) {
    if (assigned.count(seed)) continue;
    GridBox box{seed, seed, {}, {}};
    for (std::size_t d = 0; d < dims; ++d) {
      for (;;) {
        GridBox grown = box;
        if (grown.hi[d] + 1 >= region.axes[d].size()) break;
        grown.lo[d] = grown.hi[d] + 1;  // only the new slab needs checking
        ++grown.hi[d];
        if (!box_usable(grown)) break;
        ++box.hi[d];
      }
    }
    GridCell c = box.lo;
    for (;;) {
      assigned.insert(c);
      region.cells.insert(c);
      std::size_t d = 0;
      while (d < dims && c[d] == box.hi[d]) {
        c[d] = box.lo[d];
        ++d;
      }
      if (d == dims) break;
      ++c[d];
    }
    for (std::size_t d = 0; d < dims; ++d) {
      box.lo_value.push_back(region.axes[d][box.lo[d]]);
      box.hi_value.push_back(region.axes[d][box.hi[d]]);
    }
    region.boxes.push_back(std::move(box));
  }
  return region;
}

}  // namespace weaves
