#include <fstream>

#include "commands.hpp"

namespace psim::cli {

int cmd_env(const EnvOptions& options) {
  const Environment env = Environment::build(options.spec.env);
  auto os = open_out(options.out_path);
  env.write_setup_table(os);
  return kExitOk;
}

}  // namespace psim::cli
