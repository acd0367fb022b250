#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "sslasso/experiment.hpp"

namespace sslasso {

using Json = nlohmann::ordered_json;

inline Json to_json(const ConeConstantReport& r) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["value"] = r.value;
  Json support = Json::array();
  for (Index idx : r.support) support.push_back(idx + 1);  // 1-based, as in x1..xp
  j["support"] = support;
  j["c"] = r.cone_scale;
  j["certification"] = to_string(r.certification);
  j["witness"] = std::vector<double>(r.witness.data(),
                                     r.witness.data() + r.witness.size());
  return j;
}

inline Json to_json(const TrialDiagnostics& d) {
  Json j;
  j["fixed_point_min_gap"] = d.fixed_point_min_gap;
  if (d.has_l1_budget) {
    j["l1_norm"] = d.l1_norm;
    j["l1_budget"] = d.l1_budget;
    j["l1_ok"] = d.l1_ok;
  }
  j["zeta1_norm"] = d.zeta1_norm;
  j["zeta1_ok"] = d.zeta1_ok;
  if (d.has_zeta) {
    j["zeta_norm"] = d.zeta_norm;
    j["zeta_ok"] = d.zeta_ok;
  }
  j["zeta_bar_norm"] = d.zeta_bar_norm;
  j["zeta_bar_ok"] = d.zeta_bar_ok;
  j["zeta2_norm"] = d.zeta2_norm;
  j["zeta2_ok"] = d.zeta2_ok;
  if (d.has_lambda_min) {
    j["lambda_min_value"] = d.lambda_min_value;
    j["lambda_min_threshold"] = d.lambda_min_threshold_value;
    j["lambda_min_ok"] = d.lambda_min_ok;
  }
  j["supnorm_value"] = d.supnorm_value;
  j["supnorm_threshold"] = d.supnorm_threshold;
  j["supnorm_ok"] = d.supnorm_ok;
  return j;
}

inline Json to_json(const TrialReport& r) {
  Json j;
  j["trial_index"] = r.trial_index;
  j["seed"] = r.seed;
  j["variant"] = to_string(r.variant);
  j["lambda"] = r.lambda;
  j["excess_risk"] = r.excess_risk;
  j["excess_risk_se"] = r.excess_risk_se;
  if (std::isfinite(r.transductive_risk_value))
    j["transductive_risk"] = r.transductive_risk_value;
  j["rhs_bound"] = r.rhs_bound;
  j["covered"] = r.covered;
  j["kkt_residual"] = r.kkt_residual;
  j["sweeps"] = r.sweeps;
  j["converged"] = r.converged;
  j["candidate"] = r.candidate_name;
  Json support = Json::array();
  for (Index idx : r.candidate_support) support.push_back(idx + 1);
  j["candidate_support"] = support;
  j["cone_constant"] = r.cone_constant;
  j["cone_description"] = r.cone_description;
  if (!r.bound_details.empty()) {
    Json details;
    for (const auto& [key, value] : r.bound_details) details[key] = value;
    j["bound_details"] = details;
  }
  j["diagnostics"] = to_json(r.diagnostics);
  return j;
}

inline Json to_json(const CoverageReport& r, bool include_trials = true) {
  Json j;
  j["experiment"] = r.experiment;
  j["trials"] = r.trials;
  j["coverage"] = r.coverage;
  j["delta"] = r.delta;
  j["slack"] = r.slack;
  j["pass"] = r.pass;
  j["master_seed"] = r.master_seed;
  if (r.has_expectation_check) {
    j["mean_excess_risk"] = r.mean_excess_risk;
    j["mean_excess_risk_se"] = r.mean_excess_risk_se;
    j["expectation_rhs"] = r.expectation_rhs;
    j["expectation_pass"] = r.expectation_pass;
  }
  Json diag;
  diag["fixed_point_ok_fraction"] = r.fixed_point_ok_fraction;
  diag["l1_ok_fraction"] = r.l1_ok_fraction;
  diag["zeta1_coverage"] = r.zeta1_coverage;
  diag["zeta_coverage"] = r.zeta_coverage;
  diag["zeta_bar_coverage"] = r.zeta_bar_coverage;
  diag["zeta2_coverage"] = r.zeta2_coverage;
  diag["lambda_min_coverage"] = r.lambda_min_coverage;
  diag["supnorm_coverage"] = r.supnorm_coverage;
  j["diagnostic_coverage"] = diag;
  j["seeds"] = r.seeds;
  if (include_trials) {
    Json trials = Json::array();
    for (const auto& t : r.trial_reports) trials.push_back(to_json(t));
    j["trial_reports"] = trials;
  }
  return j;
}

inline Json to_json(const BenefitReport& r) {
  Json j;
  j["experiment"] = "benefit";
  j["trials"] = r.trials;
  j["lambda"] = r.lambda;
  j["median_semisupervised"] = r.median_semisupervised;
  j["median_supervised"] = r.median_supervised;
  j["pass"] = r.pass;
  j["master_seed"] = r.master_seed;
  j["seeds"] = r.seeds;
  j["semisupervised_risks"] = r.semisupervised_risks;
  j["supervised_risks"] = r.supervised_risks;
  return j;
}

// Per-trial CSV with a stable column order.
inline std::string trial_csv_header() {
  return "trial_index,seed,variant,lambda,excess_risk,excess_risk_se,"
         "transductive_risk,rhs_bound,covered,kkt_residual,sweeps,converged,"
         "candidate,cone_constant,fixed_point_min_gap,l1_norm,l1_budget,l1_ok,"
         "zeta1_ok,zeta_ok,zeta_bar_ok,zeta2_ok,lambda_min_ok,supnorm_ok";
}

namespace detail {

inline std::string csv_real(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.15g", v);
  return buffer;
}

}  // namespace detail

inline std::string trial_csv_row(const TrialReport& r) {
  const auto& d = r.diagnostics;
  std::string row;
  row += std::to_string(r.trial_index);
  row += ',';
  row += std::to_string(r.seed);
  row += ',';
  row += to_string(r.variant);
  row += ',';
  row += detail::csv_real(r.lambda);
  row += ',';
  row += detail::csv_real(r.excess_risk);
  row += ',';
  row += detail::csv_real(r.excess_risk_se);
  row += ',';
  row += std::isfinite(r.transductive_risk_value)
             ? detail::csv_real(r.transductive_risk_value)
             : std::string();
  row += ',';
  row += detail::csv_real(r.rhs_bound);
  row += ',';
  row += r.covered ? "1" : "0";
  row += ',';
  row += detail::csv_real(r.kkt_residual);
  row += ',';
  row += std::to_string(r.sweeps);
  row += ',';
  row += r.converged ? "1" : "0";
  row += ',';
  row += r.candidate_name;
  row += ',';
  row += detail::csv_real(r.cone_constant);
  row += ',';
  row += detail::csv_real(d.fixed_point_min_gap);
  row += ',';
  row += d.has_l1_budget ? detail::csv_real(d.l1_norm) : std::string();
  row += ',';
  row += d.has_l1_budget ? detail::csv_real(d.l1_budget) : std::string();
  row += ',';
  row += d.has_l1_budget ? (d.l1_ok ? "1" : "0") : "";
  row += ',';
  row += d.zeta1_ok ? "1" : "0";
  row += ',';
  row += d.has_zeta ? (d.zeta_ok ? "1" : "0") : "";
  row += ',';
  row += d.zeta_bar_ok ? "1" : "0";
  row += ',';
  row += d.zeta2_ok ? "1" : "0";
  row += ',';
  row += d.has_lambda_min ? (d.lambda_min_ok ? "1" : "0") : "";
  row += ',';
  row += d.supnorm_ok ? "1" : "0";
  return row;
}

// Atomic file write: the destination appears complete or not at all.
inline void write_file_atomically(const std::filesystem::path& path,
                                  const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw ParseError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace sslasso
