// Command-line front end: exact RIP certification, OMP solves with any of
// the three stopping rules, guarantee checks, randomized lemma verifier
// suites, and Monte Carlo experiments.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error, 3 when `verify`
// finds violations or `experiment` finds counterexamples.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ompcert/ompcert.hpp"

namespace {

using ompcert::Json;

ompcert::SenseMatrix load_sense_matrix(const std::string& path) {
  return ompcert::normalize_columns(ompcert::read_matrix_csv(path));
}

void emit(const Json& j, const std::optional<std::string>& out_path) {
  if (out_path) ompcert::write_json(*out_path, j);
  std::cout << j.dump(2) << '\n';
}

ompcert::StoppingRule parse_rule(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("--rule", "expected fixed:K, l2:B2 or linf:Binf");
  const std::string kind = text.substr(0, colon);
  const std::string value = text.substr(colon + 1);
  try {
    if (kind == "fixed") return ompcert::FixedIterations{std::stoi(value)};
    if (kind == "l2") return ompcert::ResidualL2{std::stod(value)};
    if (kind == "linf") return ompcert::CorrelationLInf{std::stod(value)};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--rule", "bad threshold '" + value + "'");
  }
  throw CLI::ValidationError("--rule", "unknown rule kind '" + kind + "'");
}

int run_certify(const std::string& matrix_path, int order,
                std::uint64_t budget, const std::optional<std::string>& out) {
  const auto a = load_sense_matrix(matrix_path);
  const auto cert = ompcert::rip_exact(a, order, budget);
  emit(ompcert::to_json(cert), out);
  return 0;
}

int run_solve(const std::string& matrix_path, const std::string& y_path,
              const std::string& rule_text, std::optional<int> max_iterations,
              const std::optional<std::string>& out) {
  const auto rule = parse_rule(rule_text);  // usage validation before any I/O
  const auto a = load_sense_matrix(matrix_path);
  const auto y = ompcert::read_vector_csv(y_path);
  const int cap = max_iterations.value_or(static_cast<int>(a.rows()));
  const auto trace = ompcert::omp_run(a, y, rule, cap);
  emit(ompcert::to_json(trace), out);
  return 0;
}

int run_check(double delta, int sparsity, double min_coeff,
              std::optional<double> b2, std::optional<double> binf,
              std::optional<double> sigma, std::optional<int> m,
              const std::optional<std::string>& out) {
  ompcert::NoiseSpec noise = ompcert::L2Ball{0.0};
  int rows = m.value_or(2);
  if (b2)
    noise = ompcert::L2Ball{*b2};
  else if (binf)
    noise = ompcert::LInfCorrelation{*binf};
  else if (sigma) {
    if (!m) throw CLI::ValidationError("--sigma", "gaussian noise needs --m");
    noise = ompcert::GaussianNoise{*sigma};
  }

  // A stand-in signal carrying the minimum coefficient magnitude; the
  // guarantee formulas only read K and min |x_i|.
  ompcert::IndexSet support(sparsity);
  ompcert::Vector values(sparsity);
  for (int i = 0; i < sparsity; ++i) {
    support[i] = i;
    values(i) = min_coeff > 0 ? min_coeff : 1.0;
  }
  if (min_coeff <= 0) values(0) = 1e-300;  // effectively zero, stays nonzero
  auto signal = ompcert::SparseSignal::from_parts(
      std::max<ompcert::Index>(sparsity, 1), support, values);
  const auto reports =
      ompcert::evaluate_guarantees(delta, signal, noise, rows);
  emit(ompcert::to_json(reports), out);
  return 0;
}

int run_verify(const std::string& lemma, std::uint64_t samples,
               std::uint64_t seed, double slack,
               const std::optional<std::string>& out) {
  std::vector<ompcert::LemmaId> ids;
  if (lemma == "2.1")
    ids = {ompcert::LemmaId::lemma_21};
  else if (lemma == "2.2")
    ids = {ompcert::LemmaId::lemma_22};
  else if (lemma == "2.3")
    ids = {ompcert::LemmaId::lemma_23};
  else if (lemma == "offsupport")
    ids = {ompcert::LemmaId::offsupport_correlation};
  else if (lemma == "all")
    ids = {ompcert::LemmaId::lemma_21, ompcert::LemmaId::lemma_22,
           ompcert::LemmaId::lemma_23, ompcert::LemmaId::offsupport_correlation};
  else
    throw CLI::ValidationError("--lemma", "expected 2.1, 2.2, 2.3, offsupport or all");

  Json results = Json::array();
  std::uint64_t violations = 0;
  for (const auto id : ids) {
    const auto suite = ompcert::run_lemma_suite(id, samples, seed, slack);
    violations += suite.violations;
    results.push_back(ompcert::to_json(suite));
  }
  const Json payload = ids.size() == 1 ? results.front() : results;
  emit(payload, out);
  return violations == 0 ? 0 : 3;
}

int run_experiment_cmd(const std::string& config_path,
                       const std::string& csv_path,
                       const std::string& json_path) {
  const auto config = ompcert::load_experiment_config(config_path);
  const auto summary = ompcert::run_experiment(config, csv_path, json_path);
  std::cout << ompcert::to_json(summary).dump(2) << '\n';
  return summary.counterexamples == 0 ? 0 : 3;
}

std::string default_output(const std::string& config_path,
                           const std::string& extension) {
  std::string stem = config_path;
  const auto dot = stem.rfind('.');
  if (dot != std::string::npos && dot > stem.rfind('/') + 1)
    stem = stem.substr(0, dot);
  return stem + extension;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthogonal matching pursuit with exact RIP certification"};
  app.require_subcommand(1);

  // certify
  auto* certify = app.add_subcommand("certify", "Exact delta_K of a matrix");
  std::string certify_matrix;
  int certify_order = 1;
  std::uint64_t certify_budget = 10'000'000;
  std::optional<std::string> certify_out;
  certify->add_option("--matrix", certify_matrix, "matrix CSV")->required();
  certify->add_option("--order", certify_order, "RIP order K")->required();
  certify->add_option("--budget", certify_budget, "max subsets to enumerate");
  certify->add_option("--out", certify_out, "also write JSON here");

  // solve
  auto* solve = app.add_subcommand("solve", "Run OMP on a matrix and y");
  std::string solve_matrix, solve_y, solve_rule;
  std::optional<int> solve_max;
  std::optional<std::string> solve_out;
  solve->add_option("--matrix", solve_matrix, "matrix CSV")->required();
  solve->add_option("--y", solve_y, "observation vector CSV")->required();
  solve->add_option("--rule", solve_rule, "fixed:K | l2:B2 | linf:Binf")->required();
  solve->add_option("--max-iterations", solve_max, "selection cap (default m)");
  solve->add_option("--out", solve_out, "also write trace JSON here");

  // check
  auto* check = app.add_subcommand("check", "Evaluate recovery guarantees");
  double check_delta = 0.0, check_min_coeff = 0.0;
  int check_k = 1;
  std::optional<double> check_b2, check_binf, check_sigma;
  std::optional<int> check_m;
  std::optional<std::string> check_out;
  check->add_option("--delta", check_delta, "exact delta_{K+1}")->required();
  check->add_option("--sparsity", check_k, "signal sparsity K")->required();
  check->add_option("--min-coeff", check_min_coeff,
                    "minimum |x_i| over the support")->required();
  check->add_option("--b2", check_b2, "l2 noise bound B2");
  check->add_option("--binf", check_binf, "correlation noise bound Binf");
  check->add_option("--sigma", check_sigma, "gaussian noise sigma");
  check->add_option("--m", check_m, "measurement count (for --sigma)");
  check->add_option("--out", check_out, "also write report JSON here");

  // verify
  auto* verify = app.add_subcommand("verify", "Randomized lemma verifier suites");
  std::string verify_lemma = "all";
  std::uint64_t verify_samples = 10'000, verify_seed = 1;
  double verify_slack = 1e-10;
  std::optional<std::string> verify_out;
  verify->add_option("--lemma", verify_lemma, "2.1 | 2.2 | 2.3 | offsupport | all");
  verify->add_option("--samples", verify_samples, "instances per suite");
  verify->add_option("--seed", verify_seed, "master seed");
  verify->add_option("--slack", verify_slack, "additive tolerance");
  verify->add_option("--out", verify_out, "also write summary JSON here");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo sweep from a config");
  std::string exp_config;
  std::string exp_csv, exp_json;
  experiment->add_option("--config", exp_config, "experiment config JSON")->required();
  experiment->add_option("--out-csv", exp_csv, "per-trial CSV path");
  experiment->add_option("--out-json", exp_json, "summary JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (certify->parsed())
      return run_certify(certify_matrix, certify_order, certify_budget, certify_out);
    if (solve->parsed())
      return run_solve(solve_matrix, solve_y, solve_rule, solve_max, solve_out);
    if (check->parsed())
      return run_check(check_delta, check_k, check_min_coeff, check_b2,
                       check_binf, check_sigma, check_m, check_out);
    if (verify->parsed())
      return run_verify(verify_lemma, verify_samples, verify_seed, verify_slack,
                        verify_out);
    if (experiment->parsed()) {
      if (exp_csv.empty()) exp_csv = default_output(exp_config, ".csv");
      if (exp_json.empty()) exp_json = default_output(exp_config, "_summary.json");
      return run_experiment_cmd(exp_config, exp_csv, exp_json);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
