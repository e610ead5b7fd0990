#include "pfol/trace_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace pfol {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string format_vector(const Vector<double>& v) {
  if (v.size() == 1) return format_double(v(0));
  std::string out = "\"";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v(i));
  }
  return out + "\"";
}

double parse_double(const std::string& field, std::size_t line) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (field.empty() || end != begin + field.size())
    throw Error(ErrorCode::kIo, "line " + std::to_string(line) + ": cannot parse number '" + field + "'");
  return x;
}

Vector<double> parse_vector(const std::string& field, std::size_t line) {
  std::vector<double> vals;
  std::stringstream ss(field);
  std::string part;
  while (std::getline(ss, part, ',')) vals.push_back(parse_double(part, line));
  if (vals.empty()) throw Error(ErrorCode::kIo, "line " + std::to_string(line) + ": empty vector field");
  return Eigen::Map<Vector<double>>(vals.data(), Eigen::Index(vals.size()));
}

// Splits one CSV line, honoring double-quoted fields (no embedded quotes).
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    else if (ch == ',' && !quoted) fields.emplace_back();
    else fields.back() += ch;
  }
  return fields;
}

}  // namespace

void write_trace(const Trace& rows, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& r : rows) {
    out << r.t << ',' << format_double(r.h) << ',' << format_vector(r.g) << ',' << format_vector(r.w) << ','
        << format_double(r.a) << ',' << format_double(r.sum_g2) << ',' << format_double(r.sum_a) << ','
        << format_double(r.clip_ratio_sum) << ',' << format_double(r.regret_u0) << '\n';
  }
}

void write_trace(const Trace& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_trace(rows, out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

Trace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw Error(ErrorCode::kIo, "trace header missing or malformed");
  Trace rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 9)
      throw Error(ErrorCode::kIo, "line " + std::to_string(lineno) + ": expected 9 fields, got " +
                                      std::to_string(f.size()));
    TraceRow r;
    r.t = static_cast<std::int64_t>(parse_double(f[0], lineno));
    r.h = parse_double(f[1], lineno);
    r.g = parse_vector(f[2], lineno);
    r.w = parse_vector(f[3], lineno);
    r.a = parse_double(f[4], lineno);
    r.sum_g2 = parse_double(f[5], lineno);
    r.sum_a = parse_double(f[6], lineno);
    r.clip_ratio_sum = parse_double(f[7], lineno);
    r.regret_u0 = parse_double(f[8], lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

Trace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  return read_trace(in);
}

}  // namespace pfol
