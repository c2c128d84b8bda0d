#include "cli_util.hpp"

#include <atomic>
#include <cstdlib>
#include <iomanip>
#include <sstream>
#include <thread>

namespace rcccli {

int resolve_threads(int requested) {
    int n = requested > 0 ? requested : int(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("RCC_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1)
            throw ValidationError("RCC_THREADS must be a positive integer, got '" +
                                  std::string(env) + "'");
        if (cap < n) n = int(cap);
    }
    return n;
}

void parallel_tasks(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_workers = std::min<std::size_t>(std::size_t(threads), count);
    pool.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void ConfigBinder::apply(const std::string& path) const {
    if (path.empty()) return;
    const nlohmann::json cfg = load_json_file(path);
    if (!cfg.is_object()) throw ValidationError("config: " + path + " must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        auto it = setters_.find(key);
        if (it == setters_.end())
            throw ValidationError("config: unknown key '" + key + "' in " + path);
        it->second(value);
    }
}

std::filesystem::path ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw ValidationError("output directory must not be empty");
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    return p;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

rcc::Graph load_graph_checked(const std::string& path) {
    try {
        return rcc::load_edge_list(path);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("input: ") + e.what());
    }
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_manifest(const std::filesystem::path& dir, const std::string& command,
                    const nlohmann::json& options, std::vector<std::string> outputs) {
    std::sort(outputs.begin(), outputs.end());
    nlohmann::json m;
    m["command"] = command;
    m["options"] = options;
    m["outputs"] = outputs;
    m["version"] = kVersion;
    auto out = open_output(dir / "manifest.json");
    out << m.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed for manifest.json");
}

nlohmann::json hp_to_json(const rcc::Hyperparams& hp) {
    return {{"alpha", hp.alpha}, {"sigma", hp.sigma}, {"c", hp.c}, {"tau", hp.tau}};
}

rcc::Hyperparams hp_from_json(const nlohmann::json& j) {
    for (const char* key : {"alpha", "sigma", "c", "tau"})
        if (!j.contains(key) || !j[key].is_number())
            throw ValidationError(std::string("hyperparameters: missing numeric '") + key + "'");
    return rcc::Hyperparams(j["alpha"].get<double>(), j["sigma"].get<double>(),
                            j["c"].get<double>(), j["tau"].get<double>());
}

std::string fmt(double x) {
    std::ostringstream out;
    out << std::setprecision(12) << x;
    return out.str();
}

}  // namespace rcccli
