#pragma once

#include <CLI11.hpp>

namespace rcccli {

void register_simulate(CLI::App& app);
void register_stats(CLI::App& app);
void register_fit(CLI::App& app);
void register_predict(CLI::App& app);
void register_report(CLI::App& app);

}  // namespace rcccli
