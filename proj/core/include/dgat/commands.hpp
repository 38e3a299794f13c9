#pragma once

#include <iosfwd>
#include <vector>

#include "dgat/run_config.hpp"

namespace dgat {

int cmd_generate(const RunConfig& cfg, std::ostream& out);
int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const RunConfig& cfg, std::ostream& out);
int cmd_explain(const RunConfig& cfg, std::ostream& out);
int cmd_bias_stats(const RunConfig& cfg, std::ostream& out);
int cmd_param_count(const RunConfig& cfg, std::ostream& out);

// Dispatch: args[0] is the subcommand. Returns the process exit status and
// prints `error: <category>: <message>` to err on failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dgat
