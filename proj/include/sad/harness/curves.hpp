#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sad::harness {

struct Series {
  std::string name;
  std::vector<double> steps;
  std::vector<double> values;
};

// Reads a training log (update,...,eval_score; rows without a score are
// skipped) or a tabular curve file (seed,episode,eval_return; one series
// per seed). Throws IoError / ParseError.
std::vector<Series> read_curve_file(const std::filesystem::path& path);

struct CurvePoint {
  double steps = 0.0;
  double mean = 0.0;
  double sem = 0.0;
};

// Mean and s.e.m. across runs on a common step grid: the union of all runs'
// steps inside the range every run covers, each run linearly interpolated.
// Throws DomainError when there are no runs or the runs do not overlap.
std::vector<CurvePoint> aggregate_curves(const std::vector<Series>& runs);

// CSV with header steps,mean,sem.
std::string format_curves(const std::vector<CurvePoint>& points);

}  // namespace sad::harness
