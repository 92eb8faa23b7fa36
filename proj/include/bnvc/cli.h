#ifndef BNVC_CLI_H_
#define BNVC_CLI_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace bnvc {

// Options shared by every subcommand. Values come from flags, then from the
// optional JSON config (flat dotted keys, e.g. "encode.weights"), then from
// these defaults.
struct RunConfig {
  std::string subcommand;
  std::string config_path;
  std::string policy = "near";
  std::string fusion = "butterfly";
  std::string model = "full";  // seeded model widths: full | toy
  int lambda_index = 2;
  int intra_period = 32;
  std::uint64_t seed = 1;
  int n_ref = 4;
};

// Exit codes: 0 success, 1 usage error, 2 data / corruption / numeric error.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace bnvc

#endif  // BNVC_CLI_H_
