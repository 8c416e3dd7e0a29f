#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tailmeter {

/// Closed-form fan-out amplification.
///
/// A service call fans out to sc leaf servers, each hosting k instances that
/// all have to answer. With independent per-leaf outlier proportion op, the
/// call misses its deadline unless all sc * k sub-requests make it:
///
///   service_outlier = 1 - (1 - op)^sc
///   service_outlier_virtualized = 1 - (1 - op)^(sc * k)
///
/// and inverting for the per-leaf budget that keeps the service level at a
/// target proportion:
///
///   required_single_server_outlier = 1 - (1 - target)^(1 / (sc * k))
///
/// Everything is evaluated through log1p/expm1, so proportions like 1e-9
/// at sc * k = 10^6 survive in double precision; naive powering would not.
namespace amplification {

double service_outlier(double op, uint64_t sc);
double service_outlier_virtualized(double op, uint64_t sc, uint64_t k);

/// Throws std::domain_error when target == 1: no finite budget exists.
double required_single_server_outlier(double target, uint64_t sc, uint64_t k = 1);

/// How many times tighter the per-leaf budget is than what a single server
/// measured: measured_op / required_single_server_outlier(target, sc, k).
/// Requires measured_op > 0 and target in (0, 1).
double reduction_factor(double measured_op, double target, uint64_t sc, uint64_t k = 1);

}  // namespace amplification

/// A labelled 2-D table of doubles, for sweeps over fan-out and proportion.
struct ReportTable {
  std::string corner;  // label for the row axis, e.g. "fanout\\op"
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<double>> cells;  // cells[row][col]
};

/// service_outlier_virtualized over a grid: rows are sc values, cols are ops.
ReportTable amplification_table(const std::vector<uint64_t>& fanouts,
                                const std::vector<double>& ops, uint64_t k = 1);

/// required_single_server_outlier over a grid: rows are sc, cols are targets.
ReportTable budget_table(const std::vector<uint64_t>& fanouts,
                         const std::vector<double>& targets, uint64_t k = 1);

}  // namespace tailmeter
