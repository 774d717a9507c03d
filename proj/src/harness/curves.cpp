#include "sad/harness/curves.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "sad/core/error.hpp"
#include "sad/core/stats.hpp"

namespace sad::harness {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_number(const std::string& s, const std::filesystem::path& path, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

double interpolate(const Series& s, double x) {
  const auto it = std::lower_bound(s.steps.begin(), s.steps.end(), x);
  const auto i = static_cast<std::size_t>(it - s.steps.begin());
  if (i < s.steps.size() && s.steps[i] == x) return s.values[i];
  const double x0 = s.steps[i - 1], x1 = s.steps[i];
  const double w = (x - x0) / (x1 - x0);
  return s.values[i - 1] + w * (s.values[i] - s.values[i - 1]);
}

}  // namespace

std::vector<Series> read_curve_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  const auto header = split_csv(line);
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  int step_col, value_col, seed_col = col("seed");
  if (seed_col >= 0) {
    step_col = col("episode");
    value_col = col("eval_return");
  } else {
    step_col = col("update");
    value_col = col("eval_score");
    if (step_col < 0) step_col = col("steps");
    if (value_col < 0) value_col = col("mean");
  }
  if (step_col < 0 || value_col < 0) throw ParseError(path.string() + ": unrecognised header '" + line + "'");

  std::map<std::string, Series> by_seed;
  std::vector<std::string> order;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) <= std::max({step_col, value_col, seed_col})) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": too few columns");
    }
    if (cells[value_col].empty()) continue;
    const std::string key = seed_col >= 0 ? cells[seed_col] : std::string();
    if (!by_seed.count(key)) order.push_back(key);
    auto& s = by_seed[key];
    s.name = seed_col >= 0 ? path.filename().string() + "#seed" + key : path.filename().string();
    s.steps.push_back(to_number(cells[step_col], path, lineno));
    s.values.push_back(to_number(cells[value_col], path, lineno));
  }
  std::vector<Series> out;
  for (const auto& k : order) {
    auto s = by_seed[k];
    for (std::size_t i = 1; i < s.steps.size(); ++i) {
      if (!(s.steps[i] > s.steps[i - 1])) throw ParseError(path.string() + ": steps must increase");
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw ParseError(path.string() + ": no data rows");
  return out;
}

std::vector<CurvePoint> aggregate_curves(const std::vector<Series>& runs) {
  if (runs.empty()) throw DomainError("curves: no runs given");
  double lo = -1e300, hi = 1e300;
  for (const auto& r : runs) {
    if (r.steps.empty() || r.steps.size() != r.values.size()) throw DomainError("curves: empty or ragged run " + r.name);
    lo = std::max(lo, r.steps.front());
    hi = std::min(hi, r.steps.back());
  }
  if (lo > hi) throw DomainError("curves: runs do not share a step range");
  std::vector<double> grid;
  for (const auto& r : runs)
    for (double x : r.steps)
      if (x >= lo && x <= hi) grid.push_back(x);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<CurvePoint> out;
  std::vector<double> vals(runs.size());
  for (double x : grid) {
    for (std::size_t i = 0; i < runs.size(); ++i) vals[i] = interpolate(runs[i], x);
    const auto ms = mean_sem(vals);
    out.push_back(CurvePoint{x, ms.mean, ms.sem});
  }
  return out;
}

std::string format_curves(const std::vector<CurvePoint>& points) {
  std::ostringstream os;
  os.precision(10);
  os << "steps,mean,sem\n";
  for (const auto& p : points) os << p.steps << ',' << p.mean << ',' << p.sem << '\n';
  return os.str();
}

}  // namespace sad::harness
