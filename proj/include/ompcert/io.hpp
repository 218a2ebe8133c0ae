#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ompcert/errors.hpp"
#include "ompcert/guarantees.hpp"
#include "ompcert/omp.hpp"
#include "ompcert/oracle.hpp"
#include "ompcert/rip.hpp"
#include "ompcert/sensing.hpp"

namespace ompcert {

using Json = nlohmann::ordered_json;

/// Decimal rendering with 17 significant digits, enough to reproduce the
/// exact double on re-read.
inline std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

// ---------------------------------------------------------------------------
// CSV matrices and vectors: one matrix row per line, comma separated,
// vectors as a single column.
// ---------------------------------------------------------------------------

inline void write_matrix_csv(const std::string& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

inline void write_vector_csv(const std::string& path, const Vector& v) {
  write_matrix_csv(path, v);
}

inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        row.push_back(v);
      } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty matrix file: " + path);
  Matrix a(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      a(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return a;
}

inline Vector read_vector_csv(const std::string& path) {
  const Matrix a = read_matrix_csv(path);
  if (a.cols() != 1) throw IoError("expected a single-column vector: " + path);
  return a.col(0);
}

// ---------------------------------------------------------------------------
// JSON views of the library's result types.
// ---------------------------------------------------------------------------

inline Json to_json(const RipCertificate& cert) {
  Json j;
  j["order"] = cert.order;
  j["delta"] = cert.delta;
  j["subsets_examined"] = cert.subsets_examined;
  j["extremal_subset"] = cert.extremal_subset;
  return j;
}

inline Json to_json(const OmpTrace& trace) {
  Json j;
  Json iterations = Json::array();
  for (const auto& it : trace.iterations) {
    Json rec;
    rec["selected_index"] = it.selected_index;
    rec["residual_l2"] = it.residual_l2;
    rec["correlation_linf"] = it.correlation_linf;
    rec["coefficients"] =
        std::vector<double>(it.coefficients.data(),
                            it.coefficients.data() + it.coefficients.size());
    iterations.push_back(std::move(rec));
  }
  j["iterations"] = std::move(iterations);
  j["final_support"] = trace.final_support;
  j["estimate"] = std::vector<double>(
      trace.estimate.data(), trace.estimate.data() + trace.estimate.size());
  j["halt_reason"] = to_string(trace.halt_reason);
  return j;
}

inline Json to_json(const GuaranteeReport& report) {
  Json j;
  j["condition_name"] = report.condition_name;
  j["lhs"] = report.lhs;
  j["rhs"] = report.rhs;
  j["satisfied"] = report.satisfied;
  // -inf margins (degenerate denominators) serialize as null
  j["margin"] = report.margin;
  j["degenerate"] = report.degenerate;
  j["inputs_echo"] = Json{{"delta", report.delta},
                          {"K", report.sparsity},
                          {"noise_bound", report.noise_bound}};
  return j;
}

inline Json to_json(const std::vector<GuaranteeReport>& reports) {
  Json arr = Json::array();
  for (const auto& rep : reports) arr.push_back(to_json(rep));
  return arr;
}

inline Json to_json(const LemmaSuiteResult& result) {
  Json j;
  j["lemma"] = result.lemma;
  j["checks_run"] = result.checks_run;
  j["violations"] = result.violations;
  j["worst_margin"] = result.worst_margin;
  j["redraws"] = result.redraws;
  if (result.lemma == "2.2")
    j["informational_delta_k_violations"] = result.informational_violations;
  return j;
}

inline void write_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace ompcert
