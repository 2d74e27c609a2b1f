#ifndef CSGP_REPORT_HPP_
#define CSGP_REPORT_HPP_

#include <string>
#include <vector>

#include <json.hpp>

#include "csgp/harness.hpp"

namespace csgp {

// Summary JSON: per-policy regret curves and diagnostics plus the fully
// resolved config echo. Written atomically.
nlohmann::json summary_to_json(const Summary& summary,
                               const nlohmann::json& config_echo);
void write_summary_json(const std::string& path, const Summary& summary,
                        const nlohmann::json& config_echo);

// Per-policy plot-ready curves (t, mean_cum_regret, se_cum_regret) reduced
// from a trace. Returns the list of files written.
std::vector<std::string> write_curve_csvs(const std::string& out_dir,
                                          const RegretTrace& trace);

void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace csgp

#endif  // CSGP_REPORT_HPP_
