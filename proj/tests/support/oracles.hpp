#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fails/analytics.hpp"
#include "fails/model.hpp"
#include "fails/registry.hpp"

// Brute-force recomputations written from the metric definitions, sharing no
// code with the library beyond the data types. Slow on purpose.
namespace fails::oracle {

/// Records with start in [from, to] whose services meet the selection.
std::vector<const IncidentRecord*> select(const IncidentDataset& d, const AnalysisSelection& sel);

std::vector<std::int64_t> mtbf(const IncidentDataset& d, const GroupKey& g);
std::vector<std::int64_t> mttr(const IncidentDataset& d, const GroupKey& g, std::size_t* skipped);

double mean(const std::vector<std::int64_t>& v);
double median(const std::vector<double>& v);
/// (x, #samples <= x) for every distinct sample value.
std::vector<std::pair<std::int64_t, std::size_t>> ecdf(const std::vector<std::int64_t>& v);
/// Quantile at q, linear interpolation at position (n - 1) * q.
double quantile(const std::vector<double>& v, double q);

unsigned weekday_monday_first(std::int64_t unix_secs);
unsigned hour_of_day(std::int64_t unix_secs);
std::string civil_date(std::int64_t unix_secs);

/// Seconds of [day, day + 86400) covered by at least one interval.
std::int64_t covered_seconds(std::int64_t day,
                             const std::vector<std::pair<std::int64_t, std::int64_t>>& intervals);
std::vector<double> availability(const IncidentDataset& d, const std::string& service,
                                 const AnalysisSelection& sel);
std::vector<double> daily_counts(const IncidentDataset& d, const AnalysisSelection& sel);
/// r(k) for k = 0..max_lag straight from the definition.
std::vector<double> acf(const std::vector<double>& x, int max_lag);

std::string combination_label(const IncidentRecord& r);

/// Runs every analytics operation on (dataset, sel) and returns a
/// description of each disagreement with the oracles. Empty means equal.
std::vector<std::string> compare_all(const IncidentDataset& d, const AnalysisSelection& sel,
                                     const Registry& registry = builtin_registry());

/// |a - b| <= tol * max(1, |a|, |b|)
bool close(double a, double b, double tol = 1e-9);

}  // namespace fails::oracle
