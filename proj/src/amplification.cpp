#include "tailmeter/amplification.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace tailmeter {
namespace amplification {

namespace {

void check_proportion(double p, const char* name) {
  if (!(p >= 0.0) || !(p <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
  }
}

double exponent(uint64_t sc, uint64_t k) {
  if (sc == 0 || k == 0) throw std::invalid_argument("fan-out must be at least 1");
  return static_cast<double>(sc) * static_cast<double>(k);
}

}  // namespace

double service_outlier(double op, uint64_t sc) {
  return service_outlier_virtualized(op, sc, 1);
}

double service_outlier_virtualized(double op, uint64_t sc, uint64_t k) {
  check_proportion(op, "outlier proportion");
  double e = exponent(sc, k);
  if (op == 1.0) return 1.0;
  // 1 - (1 - op)^e, stable for op near 0 and for huge exponents.
  return -std::expm1(e * std::log1p(-op));
}

double required_single_server_outlier(double target, uint64_t sc, uint64_t k) {
  check_proportion(target, "target proportion");
  double e = exponent(sc, k);
  if (target == 1.0) {
    throw std::domain_error("a service-level outlier proportion of 1 admits no finite budget");
  }
  // 1 - (1 - target)^(1/e)
  return -std::expm1(std::log1p(-target) / e);
}

double reduction_factor(double measured_op, double target, uint64_t sc, uint64_t k) {
  check_proportion(measured_op, "measured proportion");
  if (measured_op == 0.0) {
    throw std::invalid_argument("measured proportion must be > 0 to form a ratio");
  }
  if (target == 0.0) {
    throw std::invalid_argument("target proportion 0 leaves a zero budget");
  }
  double required = required_single_server_outlier(target, sc, k);
  return measured_op / required;
}

}  // namespace amplification

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

ReportTable amplification_table(const std::vector<uint64_t>& fanouts,
                                const std::vector<double>& ops, uint64_t k) {
  ReportTable table;
  table.corner = "fanout\\op";
  for (uint64_t sc : fanouts) table.row_labels.push_back(std::to_string(sc));
  for (double op : ops) table.col_labels.push_back(format_double(op));
  for (uint64_t sc : fanouts) {
    std::vector<double> row;
    row.reserve(ops.size());
    for (double op : ops) {
      row.push_back(amplification::service_outlier_virtualized(op, sc, k));
    }
    table.cells.push_back(std::move(row));
  }
  return table;
}

ReportTable budget_table(const std::vector<uint64_t>& fanouts,
                         const std::vector<double>& targets, uint64_t k) {
  ReportTable table;
  table.corner = "fanout\\target";
  for (uint64_t sc : fanouts) table.row_labels.push_back(std::to_string(sc));
  for (double t : targets) table.col_labels.push_back(format_double(t));
  for (uint64_t sc : fanouts) {
    std::vector<double> row;
    row.reserve(targets.size());
    for (double t : targets) {
      row.push_back(amplification::required_single_server_outlier(t, sc, k));
    }
    table.cells.push_back(std::move(row));
  }
  return table;
}

}  // namespace tailmeter
