#include "smm/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "smm/errors.hpp"

namespace smm {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_fields(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"' && trim(field).empty()) {
      quoted = true;
      was_quoted = true;
      field.clear();
    } else if (c == ',') {
      out.emplace_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw InputError("line " + std::to_string(line_no) + ": unterminated quoted field");
  out.emplace_back(was_quoted ? field : std::string(trim(field)));
  return out;
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

}  // namespace

DataSet parse_points_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<double> values;
  std::size_t columns = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  bool first_content = true;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto fields = split_fields(line, line_no);
    std::vector<double> parsed(fields.size());
    bool numeric = true;
    std::size_t bad = 0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (!parse_number(fields[j], parsed[j])) {
        numeric = false;
        bad = j;
        break;
      }
    }
    if (first_content) {
      first_content = false;
      columns = fields.size();
      if (!numeric) continue;
    }
    if (fields.size() != columns)
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns, found " +
                       std::to_string(fields.size()));
    if (!numeric)
      throw InputError("line " + std::to_string(line_no) + ": column " + std::to_string(bad + 1) +
                       " is not a finite number: '" + fields[bad] + "'");
    values.insert(values.end(), parsed.begin(), parsed.end());
    ++rows;
    if (end == text.size()) break;
  }
  if (rows == 0) throw InputError("CSV contains no data rows");
  Eigen::MatrixXd points(static_cast<Eigen::Index>(columns), static_cast<Eigen::Index>(rows));
  std::copy(values.begin(), values.end(), points.data());
  return DataSet(std::move(points));
}

DataSet load_points_csv(const std::filesystem::path& path) {
  try {
    return parse_points_csv(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string csv_text(const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out += ',';
    out += header[j];
  }
  if (!header.empty()) out += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) out += ',';
      out += format_double(values(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
  write_file(path, csv_text(header, values));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace smm
