#pragma once

#include <array>
#include <ostream>
#include <string>

#include "hlmcf/flow.hpp"

namespace hlmcf::cli {

inline constexpr std::array<const char*, 14> kSeriesColumns = {
    "t",       "dt",           "area",         "twistor_energy", "lambda1",         "max_H",   "max_A",
    "min_a3",  "hdp_margin",   "efa_residual", "efe_residual",   "metric_residual", "E_accum", "consistency_error"};

std::string series_header();
/// 17 significant digits in scientific notation; empty cells for skipped values.
std::string series_row(const StepRecord& r);
std::string format_number(double x);

}  // namespace hlmcf::cli
