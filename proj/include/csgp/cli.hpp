#ifndef CSGP_CLI_HPP_
#define CSGP_CLI_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace csgp {

struct CliOptions {
  std::string config_path;
  std::string output_dir = ".";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  int verbosity = 1;  // 0 quiet, 1 normal, 2 verbose
};

// Exit codes: 0 success, 1 config/IO error, 2 partial episode failures.
int run_command(const CliOptions& options);

int plot_data_command(const std::string& trace_path,
                      const std::string& output_dir);

// suite: splines | posterior | tmvn | policies | all
int validate_command(const std::string& suite);

int describe_command(const CliOptions& options);

}  // namespace csgp

#endif  // CSGP_CLI_HPP_
