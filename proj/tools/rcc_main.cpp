// Entry point for the rcc tool. Subcommands live in their own files; this
// wires them up and maps failures onto the exit-code contract (0 ok,
// 2 validation problem, 3 resource-budget abort, 1 anything else).
#include <iostream>

#include <CLI11.hpp>

#include "cli_util.hpp"
#include "commands.hpp"
#include "rcc/graph_stats.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Random clique cover toolkit: simulation, graph statistics, "
                 "posterior inference, and predictive checks"};
    app.set_version_flag("--version", rcccli::kVersion);
    app.require_subcommand(1);

    rcccli::register_simulate(app);
    rcccli::register_stats(app);
    rcccli::register_fit(app);
    rcccli::register_predict(app);
    rcccli::register_report(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return rcccli::kExitValidation;
    } catch (const rcccli::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rcccli::kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return rcccli::kExitValidation;
    } catch (const rcc::CliqueBudgetExceeded& e) {
        std::cerr << "resource budget: " << e.what() << " (found " << e.found() << ")\n";
        return rcccli::kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
