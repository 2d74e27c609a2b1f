#include "csgp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "csgp/errors.hpp"

namespace csgp {

namespace {

using nlohmann::json;

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

nlohmann::json summary_to_json(const Summary& summary,
                               const nlohmann::json& config_echo) {
  json j;
  j["config"] = config_echo;
  j["alpha_T"] = summary.alpha_T;
  j["c_sigma"] = summary.c_sigma;
  json policies = json::object();
  for (const auto& ps : summary.policies) {
    json p;
    p["mean_cum_regret"] = vector_to_json(ps.mean_cum_regret);
    p["se_cum_regret"] = vector_to_json(ps.se_cum_regret);
    p["gamma_hat"] = ps.gamma_hat;
    p["ucb_bound"] = ps.ucb_bound;
    p["ts_bound"] = ps.ts_bound;
    p["bound_satisfaction"] = ps.bound_satisfaction;
    p["replication_gamma_hat"] = ps.rep_gamma_hat;
    p["replication_final_regret"] = ps.rep_final_regret;
    p["fitted_lengthscale"] = ps.rep_lengthscale;
    p["fitted_variance"] = ps.rep_variance;
    policies[ps.name] = std::move(p);
  }
  j["policies"] = std::move(policies);
  json failures = json::array();
  for (const auto& f : summary.failures) {
    failures.push_back({{"replication", f.replication},
                        {"policy", f.policy},
                        {"error", f.error}});
  }
  j["failures"] = std::move(failures);
  return j;
}

void write_summary_json(const std::string& path, const Summary& summary,
                        const nlohmann::json& config_echo) {
  write_text_atomic(path, summary_to_json(summary, config_echo).dump(2) + "\n");
}

std::vector<std::string> write_curve_csvs(const std::string& out_dir,
                                          const RegretTrace& trace) {
  // policy -> t -> cumulative regrets across replications
  std::map<std::string, std::map<int, std::vector<double>>> grouped;
  for (const auto& row : trace.rows) {
    grouped[row.policy][row.t].push_back(row.cum_regret);
  }
  std::vector<std::string> written;
  for (const auto& [policy, by_t] : grouped) {
    std::string content = "t,mean_cum_regret,se_cum_regret\n";
    for (const auto& [t, values] : by_t) {
      const double n = static_cast<double>(values.size());
      double mean = 0.0;
      for (const double v : values) mean += v;
      mean /= n;
      double se = 0.0;
      if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / (n - 1.0) / n);
      }
      content += std::to_string(t);
      content += ',';
      content += format17(mean);
      content += ',';
      content += format17(se);
      content += '\n';
    }
    const std::string path =
        (std::filesystem::path(out_dir) / ("curve_" + policy + ".csv"))
            .string();
    write_text_atomic(path, content);
    written.push_back(path);
  }
  return written;
}

}  // namespace csgp
