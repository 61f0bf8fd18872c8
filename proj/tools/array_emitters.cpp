// array-emitters: batch runner for the impurity/array studies.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "atomarray/config.hpp"
#include "atomarray/studies.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

const char* kStudies[] = {"band", "impurity-map", "two-impurity-map", "distance-scan",
                          "spacing-scan", "reach-scan", "dynamics", "toy-check"};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Impurity emitters embedded in subwavelength atom arrays"};
    app.set_version_flag("--version", atomarray::kCodeVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir;
    unsigned threads = 0;
    for (const char* name : kStudies) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " study");
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--threads", threads, "worker threads (0: ARRAY_EMITTERS_THREADS or hardware)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    const std::string study = app.get_subcommands().front()->get_name();

    atomarray::RunConfig cfg;
    try {
        std::ifstream f(config_path);
        if (!f) throw atomarray::ConfigError("", "cannot read " + config_path);
        std::stringstream ss;
        ss << f.rdbuf();
        cfg = atomarray::parse_config(ss.str());
        if (atomarray::to_string(cfg.study) != study)
            throw atomarray::ConfigError("study", "config declares '" + std::string(atomarray::to_string(cfg.study)) +
                                                      "' but the command is '" + study + "'");
    } catch (const atomarray::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const auto m = atomarray::run_study(cfg, out_dir.empty() ? cfg.out_dir : out_dir, threads, &std::cout);
        std::cout << "config hash " << m.json["config_hash"].get<std::string>() << ", " << m.outputs.size()
                  << " output file(s)\n";
    } catch (const atomarray::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "compute error: " << e.what() << '\n';
        return kExitCompute;
    }
    return 0;
}
