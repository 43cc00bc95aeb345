#include "copulasurv/data.hpp"

#include <numeric>
#include <set>
#include <sstream>

#include "copulasurv/errors.hpp"

namespace copulasurv {

void Dataset::validate() const {
  if (clusters.empty()) throw InputError("dataset has no clusters");
  const std::size_t p = covariate_names.size();
  std::set<std::string> seen;
  for (const auto& c : clusters) {
    if (c.subjects.empty()) {
      throw InputError("cluster '" + c.id + "' has no subjects");
    }
    if (!seen.insert(c.id).second) {
      throw InputError("duplicate cluster id '" + c.id + "'");
    }
    for (const auto& s : c.subjects) {
      if (!(s.time > 0.0)) {
        std::ostringstream os;
        os << "cluster '" << c.id << "': nonpositive time " << s.time;
        throw InputError(os.str());
      }
      if (s.status != 0 && s.status != 1) {
        throw InputError("cluster '" + c.id + "': status must be 0 or 1");
      }
      if (s.covariates.size() != p) {
        std::ostringstream os;
        os << "cluster '" << c.id << "': expected " << p << " covariates, got "
           << s.covariates.size();
        throw InputError(os.str());
      }
    }
  }
}

std::vector<int> Dataset::cluster_order_by_id() const {
  std::vector<int> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [this](int a, int b) {
    return clusters[a].id < clusters[b].id;
  });
  return order;
}

} // namespace copulasurv
