#pragma once

#include "cli_common.hpp"

namespace cocopnp::cli {

// Each registers a subcommand on `app` and returns the action to run when
// that subcommand is selected.
Action add_simulate(CLI::App& app);
Action add_restore(CLI::App& app);
Action add_sweep(CLI::App& app);
Action add_certify(CLI::App& app);
Action add_train(CLI::App& app);
Action add_theory(CLI::App& app);

}  // namespace cocopnp::cli
