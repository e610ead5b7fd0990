#pragma once

#include <iosfwd>
#include <string>

#include "pfol/core.hpp"

namespace pfol {

inline constexpr const char* kTraceHeader = "t,h,g,w,a,sum_g2,sum_a,clip_ratio_sum,regret_u0";

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

void write_trace(const Trace& rows, std::ostream& out);
void write_trace(const Trace& rows, const std::string& path);
Trace read_trace(std::istream& in);
Trace read_trace(const std::string& path);

}  // namespace pfol
