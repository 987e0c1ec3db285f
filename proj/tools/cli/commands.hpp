#pragma once

#include <CLI11.hpp>

namespace ttm::cli {

/// Registers every subcommand on `app`. Each subcommand's callback does the work.
void add_commands(CLI::App& app);

}  // namespace ttm::cli
