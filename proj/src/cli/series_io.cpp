#include "hlmcf/cli/series_io.hpp"

#include <cstdio>

namespace hlmcf::cli {

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string series_header() {
  std::string s;
  for (std::size_t c = 0; c < kSeriesColumns.size(); ++c) {
    if (c) s += ',';
    s += kSeriesColumns[c];
  }
  return s + "\n";
}

std::string series_row(const StepRecord& r) {
  std::string s;
  auto put = [&s](double x) {
    s += format_number(x);
    s += ',';
  };
  auto opt = [&s](const std::optional<double>& x) {
    if (x) s += format_number(*x);
    s += ',';
  };
  put(r.t);
  put(r.dt);
  put(r.area);
  put(r.twistor_energy);
  opt(r.lambda1);
  put(r.max_H);
  put(r.max_A);
  put(r.min_a3);
  put(r.hdp_margin);
  opt(r.efa_residual);
  opt(r.efe_residual);
  opt(r.metric_residual);
  put(r.E_accum);
  opt(r.consistency_error);
  s.back() = '\n';
  return s;
}

}  // namespace hlmcf::cli
