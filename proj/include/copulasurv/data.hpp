#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace copulasurv {

// One right-censored observation: time X, event indicator delta, covariates Z.
struct Subject {
  double time = 0.0;
  int status = 0; // 1 = event observed, 0 = censored
  std::vector<double> covariates;
};

struct Cluster {
  std::string id;
  std::vector<Subject> subjects;

  int size() const { return static_cast<int>(subjects.size()); }
  int event_count() const {
    int d = 0;
    for (const auto& s : subjects) d += s.status;
    return d;
  }
};

struct Dataset {
  std::vector<Cluster> clusters;
  std::vector<std::string> covariate_names;

  int covariate_count() const {
    return static_cast<int>(covariate_names.size());
  }
  int n_clusters() const { return static_cast<int>(clusters.size()); }
  int n_subjects() const {
    int n = 0;
    for (const auto& c : clusters) n += c.size();
    return n;
  }
  int n_events() const {
    int d = 0;
    for (const auto& c : clusters) d += c.event_count();
    return d;
  }
  int max_cluster_events() const {
    int m = 0;
    for (const auto& c : clusters) m = std::max(m, c.event_count());
    return m;
  }

  // Throws InputError on dimension mismatches or duplicate cluster ids.
  void validate() const;

  // Indices of clusters in ascending id order; the deterministic evaluation
  // and jackknife-grouping order.
  std::vector<int> cluster_order_by_id() const;
};

} // namespace copulasurv
