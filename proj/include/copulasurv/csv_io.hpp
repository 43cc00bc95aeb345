#pragma once

#include <iosfwd>
#include <string>

#include "copulasurv/data.hpp"

namespace copulasurv {

// Schema: header `cluster,time,status,<cov1>,...`; rows sharing a cluster
// value form one cluster, in first-appearance order. Parse errors carry
// the 1-based line number.
Dataset read_dataset_csv(std::istream& in, const std::string& source_name);
Dataset read_dataset_csv(const std::string& path);

// Numbers are written with 12 significant digits, enough for a bit-stable
// round trip at fitting precision.
void write_dataset_csv(const Dataset& data, std::ostream& out);
void write_dataset_csv(const Dataset& data, const std::string& path);

} // namespace copulasurv
