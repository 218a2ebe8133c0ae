#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "ompcert/guarantees.hpp"
#include "ompcert/io.hpp"
#include "ompcert/omp.hpp"
#include "ompcert/parallel.hpp"
#include "ompcert/rip.hpp"
#include "ompcert/rng.hpp"
#include "ompcert/sensing.hpp"

namespace ompcert {

/// How trial coefficients are drawn: random signs, magnitudes either
/// pinned at min_magnitude or uniform in [min_magnitude,
/// scale_factor * min_magnitude]. A min_magnitude of zero switches the
/// uniform policy to magnitudes in (0, 1) — the hypothesis-free regime.
struct CoeffPolicy {
  enum class Magnitude { fixed_at_min, uniform_scaled };
  double min_magnitude = 1.0;
  Magnitude magnitude = Magnitude::fixed_at_min;
  double scale_factor = 2.0;  // only read for uniform_scaled
};

struct ExperimentConfig {
  enum class StopRule { fixed_iterations, residual_l2, correlation_linf };
  enum class MatrixMode { fresh_per_trial, fixed };
  enum class MatrixFamily { gaussian, low_coherence };

  int m = 0;
  int n = 0;
  int sparsity = 0;  // K
  int trials = 0;
  NoiseSpec noise = L2Ball{0.0};
  CoeffPolicy coeff_policy;
  StopRule stop_rule = StopRule::residual_l2;
  /// For fixed_iterations: the iteration count (0 means K). For the two
  /// threshold rules: an explicit threshold; when absent the threshold is
  /// derived from the noise spec (B2, Binf, or the Gaussian l2 radius).
  int stop_iterations = 0;
  std::optional<double> stop_threshold;
  std::uint64_t master_seed = 0;
  bool certify = false;
  MatrixMode matrix_mode = MatrixMode::fresh_per_trial;
  MatrixFamily matrix_family = MatrixFamily::gaussian;
  std::uint64_t rip_budget = 10'000'000;

  void validate() const {
    if (sparsity < 1 || sparsity > m || m > n)
      throw Error("config requires 1 <= K <= m <= n");
    if (trials < 1) throw Error("config requires trials >= 1");
    if (coeff_policy.min_magnitude < 0)
      throw Error("min_magnitude must be >= 0");
    if (coeff_policy.magnitude == CoeffPolicy::Magnitude::uniform_scaled &&
        coeff_policy.scale_factor < 1.0)
      throw Error("scale_factor must be >= 1");
  }
};

/// Uniformly random size-K support with coefficients per policy;
/// deterministic per seed. Draw order: support (partial Fisher-Yates),
/// then per entry a sign and a magnitude.
inline SparseSignal gen_sparse_signal(Index n, int sparsity,
                                      const CoeffPolicy& policy,
                                      std::uint64_t seed) {
  if (sparsity < 0 || sparsity > n) throw Error("need 0 <= K <= n");
  Rng rng(seed);
  std::vector<Index> all(n);
  for (Index i = 0; i < n; ++i) all[i] = i;
  for (int i = 0; i < sparsity; ++i) {
    const auto j = i + rng.uniform_below(static_cast<std::uint64_t>(n - i));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
  }
  IndexSet support(all.begin(), all.begin() + sparsity);
  std::sort(support.begin(), support.end());

  Vector values(sparsity);
  for (int i = 0; i < sparsity; ++i) {
    const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    double magnitude = policy.min_magnitude;
    if (policy.magnitude == CoeffPolicy::Magnitude::uniform_scaled) {
      if (policy.min_magnitude > 0.0) {
        magnitude += (policy.scale_factor - 1.0) * policy.min_magnitude *
                     rng.uniform01();
      } else {
        do {
          magnitude = rng.uniform01();
        } while (magnitude == 0.0);
      }
    }
    if (magnitude <= 0.0)
      throw Error("coefficient policy produced a zero magnitude");
    values(i) = sign * magnitude;
  }
  return SparseSignal::from_parts(n, std::move(support), std::move(values));
}

/// One noise realization plus the norms the guarantees care about.
struct NoiseDraw {
  Vector z;
  double realized_l2 = 0.0;
  double realized_corr_inf = 0.0;
};

/// Draws noise matching the spec:
///  - L2Ball: a Gaussian direction scaled to radius u*B2, u uniform in
///    [0,1), so ||z||_2 < B2 strictly.
///  - LInfCorrelation: a Gaussian direction scaled so that
///    ||A* z||_inf = u*Binf, u uniform in [0,1); a final deterministic
///    rescale by Binf/(||A* z||_inf (1+1e-9)) would trigger only if the
///    bound were ever violated.
///  - Gaussian: i.i.d. N(0, sigma^2) entries, unconstrained.
/// Draw order (direction first, then u) is part of the replay contract.
inline NoiseDraw sample_noise(const NoiseSpec& spec, const SenseMatrix& a,
                              std::uint64_t seed) {
  Rng rng(seed);
  const Index m = a.rows();
  NoiseDraw draw;
  draw.z = Vector::Zero(m);

  auto direction = [&]() {
    Vector g(m);
    do {
      for (Index i = 0; i < m; ++i) g(i) = rng.normal();
    } while (g.norm() == 0.0);
    return g;
  };

  if (const auto* l2 = std::get_if<L2Ball>(&spec)) {
    if (l2->b2 > 0.0) {
      const Vector g = direction();
      const double u = rng.uniform01();
      draw.z = g * (u * l2->b2 / g.norm());
    }
  } else if (const auto* linf = std::get_if<LInfCorrelation>(&spec)) {
    if (linf->binf > 0.0) {
      Vector g = direction();
      double corr = (a.mat().transpose() * g).cwiseAbs().maxCoeff();
      while (corr == 0.0) {
        g = direction();
        corr = (a.mat().transpose() * g).cwiseAbs().maxCoeff();
      }
      const double u = rng.uniform01();
      draw.z = g * (u * linf->binf / corr);
      const double realized = (a.mat().transpose() * draw.z).cwiseAbs().maxCoeff();
      if (realized >= linf->binf)
        draw.z *= linf->binf / (realized * (1.0 + 1e-9));
    }
  } else if (const auto* gauss = std::get_if<GaussianNoise>(&spec)) {
    for (Index i = 0; i < m; ++i) draw.z(i) = gauss->sigma * rng.normal();
  }

  draw.realized_l2 = draw.z.norm();
  draw.realized_corr_inf = (a.mat().transpose() * draw.z).cwiseAbs().maxCoeff();
  return draw;
}

/// Outcome of a single trial.
struct TrialRecord {
  int trial_index = 0;
  std::optional<double> delta_kp1;
  std::optional<bool> thm_l2_hypotheses;    // l2 / Gaussian noise paths
  std::optional<bool> thm_linf_hypotheses;  // correlation-bounded path
  IndexSet true_support;
  IndexSet recovered_support;  // sorted
  bool exact_support_match = false;
  int iterations_used = 0;
  double final_residual_l2 = 0.0;
  HaltReason halt_reason = HaltReason::max_iterations;
  std::vector<GuaranteeReport> reports;

  /// The applicable theorem's hypotheses, when certified.
  std::optional<bool> hypotheses_satisfied() const {
    if (thm_linf_hypotheses.has_value()) return thm_linf_hypotheses;
    return thm_l2_hypotheses;
  }
};

namespace detail {

inline SenseMatrix make_matrix(const ExperimentConfig& config,
                               std::uint64_t seed) {
  switch (config.matrix_family) {
    case ExperimentConfig::MatrixFamily::low_coherence:
      return gen_low_coherence_matrix(config.m, config.n, seed);
    case ExperimentConfig::MatrixFamily::gaussian:
    default:
      return gen_gaussian_matrix(config.m, config.n, seed);
  }
}

inline StoppingRule make_rule(const ExperimentConfig& config) {
  switch (config.stop_rule) {
    case ExperimentConfig::StopRule::fixed_iterations:
      return FixedIterations{config.stop_iterations > 0 ? config.stop_iterations
                                                        : config.sparsity};
    case ExperimentConfig::StopRule::residual_l2: {
      if (config.stop_threshold) return ResidualL2{*config.stop_threshold};
      if (const auto* l2 = std::get_if<L2Ball>(&config.noise))
        return ResidualL2{l2->b2};
      if (const auto* gauss = std::get_if<GaussianNoise>(&config.noise))
        return ResidualL2{gaussian_l2_bound(config.m, gauss->sigma)};
      throw Error("residual_l2 stopping needs a threshold or l2/gaussian noise");
    }
    case ExperimentConfig::StopRule::correlation_linf: {
      if (config.stop_threshold)
        return CorrelationLInf{*config.stop_threshold};
      if (const auto* linf = std::get_if<LInfCorrelation>(&config.noise))
        return CorrelationLInf{linf->binf};
      throw Error("correlation_linf stopping needs a threshold or linf noise");
    }
  }
  throw Error("unreachable");
}

}  // namespace detail

/// Per-trial seeds: three independent streams (matrix, signal, noise)
/// derived from derive_seed(master_seed, trial_index), so switching the
/// matrix mode does not disturb the signal/noise draws.
inline TrialRecord run_trial(const ExperimentConfig& config, int trial_index,
                             const SenseMatrix* fixed_matrix = nullptr,
                             std::optional<double> fixed_delta = std::nullopt) {
  const std::uint64_t trial_seed =
      derive_seed(config.master_seed, static_cast<std::uint64_t>(trial_index));

  const bool fixed_mode =
      config.matrix_mode == ExperimentConfig::MatrixMode::fixed;
  // The fixed matrix comes from slot 0 of the master stream, so a direct
  // run_trial call agrees with run_experiment whether or not the caller
  // passed the cached matrix.
  const SenseMatrix a =
      fixed_mode ? (fixed_matrix
                        ? *fixed_matrix
                        : detail::make_matrix(
                              config, derive_seed(config.master_seed, 0)))
                 : detail::make_matrix(config, derive_seed(trial_seed, 1));

  const SparseSignal x = gen_sparse_signal(config.n, config.sparsity,
                                           config.coeff_policy,
                                           derive_seed(trial_seed, 2));
  const NoiseDraw noise = sample_noise(config.noise, a, derive_seed(trial_seed, 3));
  // constraint honesty: the draw must sit strictly inside its bound
  if (const auto* l2 = std::get_if<L2Ball>(&config.noise)) {
    if (l2->b2 > 0.0 && noise.realized_l2 >= l2->b2)
      throw Error("noise draw violated its l2 bound");
  } else if (const auto* linf = std::get_if<LInfCorrelation>(&config.noise)) {
    if (linf->binf > 0.0 && noise.realized_corr_inf >= linf->binf)
      throw Error("noise draw violated its correlation bound");
  }
  const Vector y = a.mat() * x.dense() + noise.z;

  TrialRecord record;
  record.trial_index = trial_index;
  record.true_support = x.support;

  if (config.certify) {
    const double delta = (fixed_mode && fixed_delta)
        ? *fixed_delta
        : rip_exact(a, guarantee_delta_order(config.sparsity),
                    config.rip_budget).delta;
    record.delta_kp1 = delta;
    record.reports = evaluate_guarantees(delta, x, config.noise, config.m);
    const bool delta_ok = record.reports.front().satisfied;
    for (const auto& rep : record.reports) {
      if (rep.condition_name == "l2_min_coeff" ||
          rep.condition_name == "gaussian_min_coeff")
        record.thm_l2_hypotheses = delta_ok && rep.satisfied;
      if (rep.condition_name == "linf_min_coeff")
        record.thm_linf_hypotheses = delta_ok && rep.satisfied;
    }
  }

  const OmpTrace trace = omp_run(a, y, detail::make_rule(config), config.m);
  record.recovered_support = trace.sorted_support();
  record.exact_support_match = record.recovered_support == x.support;
  record.iterations_used = static_cast<int>(trace.iterations.size());
  record.final_residual_l2 =
      trace.iterations.empty() ? y.norm() : trace.iterations.back().residual_l2;
  record.halt_reason = trace.halt_reason;
  return record;
}

/// Aggregate results of an experiment sweep.
struct ExperimentSummary {
  int trials = 0;
  int matches = 0;
  int hypothesis_trials = 0;
  int matches_given_hypotheses = 0;
  int counterexamples = 0;  // hypotheses held, recovery failed

  double recovery_rate_overall() const {
    return trials ? static_cast<double>(matches) / trials : 0.0;
  }
  double hypothesis_rate() const {
    return trials ? static_cast<double>(hypothesis_trials) / trials : 0.0;
  }
  std::optional<double> recovery_rate_given_hypotheses() const {
    if (hypothesis_trials == 0) return std::nullopt;
    return static_cast<double>(matches_given_hypotheses) / hypothesis_trials;
  }
};

inline Json to_json(const ExperimentSummary& summary) {
  Json j;
  j["recovery_rate_overall"] = summary.recovery_rate_overall();
  if (const auto rate = summary.recovery_rate_given_hypotheses())
    j["recovery_rate_given_hypotheses"] = *rate;
  else
    j["recovery_rate_given_hypotheses"] = nullptr;
  j["hypothesis_rate"] = summary.hypothesis_rate();
  j["counterexample_count"] = summary.counterexamples;
  return j;
}

namespace detail {

inline std::string csv_cell_bool(const std::optional<bool>& value) {
  if (!value) return "";
  return *value ? "1" : "0";
}

inline std::string join_indices(const IndexSet& indices) {
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(indices[i]);
  }
  return out;
}

}  // namespace detail

/// Runs every trial (in parallel, results ordered by trial_index), writes
/// one CSV row per trial plus a JSON summary, and returns the summary.
/// Output is byte-identical across re-runs with the same config.
inline ExperimentSummary run_experiment(const ExperimentConfig& config,
                                        const std::string& csv_path,
                                        const std::string& json_path) {
  config.validate();

  std::optional<SenseMatrix> fixed_matrix;
  std::optional<double> fixed_delta;
  if (config.matrix_mode == ExperimentConfig::MatrixMode::fixed) {
    fixed_matrix = detail::make_matrix(config, derive_seed(config.master_seed, 0));
    if (config.certify)
      fixed_delta = rip_exact(*fixed_matrix,
                              guarantee_delta_order(config.sparsity),
                              config.rip_budget).delta;
  }

  std::vector<TrialRecord> records(static_cast<std::size_t>(config.trials));
  parallel_for(records.size(), [&](std::size_t i) {
    records[i] = run_trial(config, static_cast<int>(i),
                           fixed_matrix ? &*fixed_matrix : nullptr, fixed_delta);
  });

  ExperimentSummary summary;
  summary.trials = config.trials;
  for (const auto& record : records) {
    if (record.exact_support_match) ++summary.matches;
    if (const auto hyp = record.hypotheses_satisfied(); hyp && *hyp) {
      ++summary.hypothesis_trials;
      if (record.exact_support_match)
        ++summary.matches_given_hypotheses;
      else
        ++summary.counterexamples;
    }
  }

  std::ofstream csv(csv_path);
  if (!csv) throw IoError("cannot open for writing: " + csv_path);
  csv << "trial_index,delta_kp1,thm33_hyp,thm35_hyp,recovered,match,"
         "iterations,residual\n";
  for (const auto& record : records) {
    csv << record.trial_index << ','
        << (record.delta_kp1 ? format_double(*record.delta_kp1) : "") << ','
        << detail::csv_cell_bool(record.thm_l2_hypotheses) << ','
        << detail::csv_cell_bool(record.thm_linf_hypotheses) << ','
        << detail::join_indices(record.recovered_support) << ','
        << (record.exact_support_match ? "1" : "0") << ','
        << record.iterations_used << ','
        << format_double(record.final_residual_l2) << '\n';
  }
  if (!csv) throw IoError("write failed: " + csv_path);
  csv.close();

  write_json(json_path, to_json(summary));
  return summary;
}

// ---------------------------------------------------------------------------
// Config file parsing: JSON with exactly the ExperimentConfig fields;
// unknown keys are rejected so typos fail fast.
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown_keys(const Json& obj,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
      throw Error("unknown key '" + item.key() + "' in " + where);
  }
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const Json& j) {
  detail::reject_unknown_keys(
      j,
      {"m", "n", "K", "trials", "noise", "coeff_policy", "stopping",
       "master_seed", "certify", "matrix_mode", "matrix_family", "rip_budget"},
      "config");
  ExperimentConfig config;
  config.m = j.at("m").get<int>();
  config.n = j.at("n").get<int>();
  config.sparsity = j.at("K").get<int>();
  config.trials = j.at("trials").get<int>();
  config.master_seed = j.at("master_seed").get<std::uint64_t>();
  config.certify = j.at("certify").get<bool>();
  if (j.contains("rip_budget"))
    config.rip_budget = j.at("rip_budget").get<std::uint64_t>();

  const Json& noise = j.at("noise");
  detail::reject_unknown_keys(noise, {"type", "b2", "binf", "sigma"}, "noise");
  const std::string type = noise.at("type").get<std::string>();
  if (type == "l2_ball")
    config.noise = L2Ball{noise.at("b2").get<double>()};
  else if (type == "linf_correlation")
    config.noise = LInfCorrelation{noise.at("binf").get<double>()};
  else if (type == "gaussian")
    config.noise = GaussianNoise{noise.at("sigma").get<double>()};
  else
    throw Error("unknown noise type '" + type + "'");

  const Json& policy = j.at("coeff_policy");
  detail::reject_unknown_keys(
      policy, {"min_magnitude", "magnitude", "scale_factor"}, "coeff_policy");
  config.coeff_policy.min_magnitude = policy.at("min_magnitude").get<double>();
  const std::string magnitude = policy.at("magnitude").get<std::string>();
  if (magnitude == "fixed_at_min")
    config.coeff_policy.magnitude = CoeffPolicy::Magnitude::fixed_at_min;
  else if (magnitude == "uniform_scaled")
    config.coeff_policy.magnitude = CoeffPolicy::Magnitude::uniform_scaled;
  else
    throw Error("unknown magnitude policy '" + magnitude + "'");
  if (policy.contains("scale_factor"))
    config.coeff_policy.scale_factor = policy.at("scale_factor").get<double>();

  const Json& stopping = j.at("stopping");
  detail::reject_unknown_keys(stopping, {"rule", "threshold", "iterations"},
                              "stopping");
  const std::string rule = stopping.at("rule").get<std::string>();
  if (rule == "fixed_iterations")
    config.stop_rule = ExperimentConfig::StopRule::fixed_iterations;
  else if (rule == "residual_l2")
    config.stop_rule = ExperimentConfig::StopRule::residual_l2;
  else if (rule == "correlation_linf")
    config.stop_rule = ExperimentConfig::StopRule::correlation_linf;
  else
    throw Error("unknown stopping rule '" + rule + "'");
  if (stopping.contains("threshold"))
    config.stop_threshold = stopping.at("threshold").get<double>();
  if (stopping.contains("iterations"))
    config.stop_iterations = stopping.at("iterations").get<int>();

  const std::string mode = j.at("matrix_mode").get<std::string>();
  if (mode == "fresh_per_trial")
    config.matrix_mode = ExperimentConfig::MatrixMode::fresh_per_trial;
  else if (mode == "fixed")
    config.matrix_mode = ExperimentConfig::MatrixMode::fixed;
  else
    throw Error("unknown matrix_mode '" + mode + "'");

  if (j.contains("matrix_family")) {
    const std::string family = j.at("matrix_family").get<std::string>();
    if (family == "gaussian")
      config.matrix_family = ExperimentConfig::MatrixFamily::gaussian;
    else if (family == "low_coherence")
      config.matrix_family = ExperimentConfig::MatrixFamily::low_coherence;
    else
      throw Error("unknown matrix_family '" + family + "'");
  }

  config.validate();
  return config;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("bad JSON in " + path + ": " + e.what());
  }
  return parse_experiment_config(j);
}

}  // namespace ompcert
