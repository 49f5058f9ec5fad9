#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <nlohmann/json.hpp>

#include "eitlab/errors.hpp"
#include "eitlab/experiments.hpp"
#include "eitlab/io.hpp"
#include "eitlab/linalg.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Boundary-map experiments for anisotropic conductivities"};
    std::string experiment;
    std::string config_path;
    std::string out_dir;
    int threads = 0;
    app.add_option("experiment", experiment, "Experiment to run")
        ->required()
        ->check(CLI::IsMember(eitlab::experiment_names()));
    app.add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (default: config output_path, else .)");
    app.add_option("--threads", threads, "Worker threads (default: EITLAB_THREADS or LAB_THREADS)")
        ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    try {
        if (threads > 0)
            eitlab::set_thread_count(threads);
        const std::string text = eitlab::read_text_file(config_path);
        if (out_dir.empty()) {
            const auto doc = nlohmann::json::parse(text, nullptr, false);
            out_dir = doc.is_object() && doc.contains("output_path") && doc["output_path"].is_string()
                          ? doc["output_path"].get<std::string>()
                          : ".";
        }
        const eitlab::ExperimentOutput result = eitlab::run_experiment_json(text, experiment);
        result.write(out_dir);
        for (const auto& a : result.assertions)
            std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << ": " << a.detail << '\n';
        std::cout << experiment << ": " << (result.passed() ? "PASS" : "FAIL") << " (" << out_dir
                  << ")\n";
        return result.passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "lab: " << e.what() << '\n';
        return 2;
    }
}
