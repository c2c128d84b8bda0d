// Shared plumbing for the command-line tool: exit-code conventions, the
// worker pool, config-file merging, and manifest emission.
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcc/graph.hpp"
#include "rcc/hyperparams.hpp"

namespace rcccli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 2 validation problem (flags, config files, input
// datasets, out-of-domain parameters), 3 resource-budget abort.
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBudget = 3;

// Input problems raised past the initial flag parse.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Worker count: explicit request, else hardware concurrency, capped by the
// RCC_THREADS environment variable when set.
int resolve_threads(int requested);

// Runs fn(0..count-1) on up to `threads` workers. Tasks must write only into
// their own result slot so the output cannot depend on scheduling; the first
// failing task (by index) has its exception rethrown on the calling thread.
void parallel_tasks(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// Applies a JSON config file on top of already-parsed flags: every key
// present in the file overrides the corresponding option value.
class ConfigBinder {
  public:
    template <typename T>
    void bind(const std::string& key, T& target) {
        setters_[key] = [&target, key](const nlohmann::json& v) {
            try {
                target = v.get<T>();
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError("config: bad value for '" + key + "': " + e.what());
            }
        };
    }
    // No-op when path is empty. Unknown keys are an error so typos cannot
    // silently fall back to flag values.
    void apply(const std::string& path) const;

  private:
    std::map<std::string, std::function<void(const nlohmann::json&)>> setters_;
};

std::filesystem::path ensure_out_dir(const std::string& dir);
std::ofstream open_output(const std::filesystem::path& path);

// Loaders that re-raise parse/IO problems as validation errors.
rcc::Graph load_graph_checked(const std::string& path);
nlohmann::json load_json_file(const std::string& path);

// manifest.json records the effective experiment spec (command, options,
// output files, library version). Deliberately no timestamps or host info so
// a rerun of the same spec produces a byte-identical manifest.
void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const nlohmann::json& options, std::vector<std::string> outputs);

nlohmann::json hp_to_json(const rcc::Hyperparams& hp);
rcc::Hyperparams hp_from_json(const nlohmann::json& j);

// Uniform float formatting for CSV cells (12 significant digits, matching the
// trace writer in the library).
std::string fmt(double x);

}  // namespace rcccli
