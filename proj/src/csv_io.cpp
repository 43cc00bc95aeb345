#include "copulasurv/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "copulasurv/errors.hpp"

namespace copulasurv {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line_no,
                              const std::string& what) {
  std::ostringstream os;
  os << source << ":" << line_no << ": " << what;
  throw InputError(os.str());
}

double parse_number(const std::string& source, std::size_t line_no,
                    const std::string& text, const std::string& column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    parse_error(source, line_no,
                "cannot parse '" + text + "' in column '" + column + "'");
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

} // namespace

Dataset read_dataset_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line))
    throw InputError(source_name + ": empty file, header row required");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "cluster" || header[1] != "time" ||
      header[2] != "status")
    parse_error(source_name, 1,
                "header must start with 'cluster,time,status'");

  Dataset data;
  data.covariate_names.assign(header.begin() + 3, header.end());
  const std::size_t n_fields = header.size();
  std::map<std::string, std::size_t> index_of;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != n_fields) {
      std::ostringstream os;
      os << "expected " << n_fields << " fields, got " << fields.size();
      parse_error(source_name, line_no, os.str());
    }
    if (fields[0].empty())
      parse_error(source_name, line_no, "empty cluster identifier");

    Subject s;
    s.time = parse_number(source_name, line_no, fields[1], "time");
    if (!(s.time > 0.0))
      parse_error(source_name, line_no, "time must be positive");
    if (fields[2] == "0") s.status = 0;
    else if (fields[2] == "1") s.status = 1;
    else parse_error(source_name, line_no, "status must be 0 or 1");
    s.covariates.reserve(n_fields - 3);
    for (std::size_t j = 3; j < n_fields; ++j)
      s.covariates.push_back(
          parse_number(source_name, line_no, fields[j], header[j]));

    auto [it, inserted] = index_of.try_emplace(fields[0], data.clusters.size());
    if (inserted) data.clusters.push_back(Cluster{fields[0], {}});
    data.clusters[it->second].subjects.push_back(std::move(s));
  }
  if (data.clusters.empty())
    throw InputError(source_name + ": no data rows");
  data.validate();
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_dataset_csv(in, path);
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  out << "cluster,time,status";
  for (const auto& name : data.covariate_names) out << "," << name;
  out << "\n";
  for (const auto& c : data.clusters) {
    for (const auto& s : c.subjects) {
      out << c.id << "," << format_number(s.time) << "," << s.status;
      for (double z : s.covariates) out << "," << format_number(z);
      out << "\n";
    }
  }
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_dataset_csv(data, out);
  if (!out) throw InputError("write failed for '" + path + "'");
}

} // namespace copulasurv
