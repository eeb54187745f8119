// twophase: command-line front end over the C API.
//
//   twophase run        --config FILE [--out DIR] [--override k=v]... [--quiet]
//   twophase sweep      --config FILE [--out DIR] [--override k=v]... [--quiet]
//   twophase check-init --config FILE [--out DIR] [--override k=v]... [--quiet]
//   twophase report     SUMMARY...
//
// Exit codes: 0 pass, 1 runtime or invariant failure, 2 configuration error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twophase/twophase.h"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "experiment configuration (JSON)")->required();
    cmd->add_option("--out", o.out, "output directory (default: outputs.directory of the config)");
    cmd->add_option("--override", o.overrides, "key.path=value, applied before validation")->take_all();
    cmd->add_flag("--quiet", o.quiet, "print nothing on success");
}

std::string read_string(tp_status (*get)(const tp_config*, char*, size_t, size_t*), const tp_config* cfg) {
    size_t len = 0;
    get(cfg, nullptr, 0, &len);
    std::string s(len + 1, '\0');
    if (get(cfg, s.data(), s.size(), &len) != TP_OK) return {};
    s.resize(len);
    return s;
}

using Entry = tp_status (*)(const tp_config*, const char*, int, int*);

int run_verb(const Options& o, Entry entry, bool needs_sweep) {
    std::vector<const char*> ov;
    for (const auto& s : o.overrides) ov.push_back(s.c_str());
    tp_config* cfg = nullptr;
    if (tp_config_from_file(o.config.c_str(), ov.data(), ov.size(), &cfg) != TP_OK) {
        std::cerr << "config error: " << tp_last_error_message() << '\n';
        return 2;
    }
    if (needs_sweep && !tp_config_has_sweep(cfg)) {
        std::cerr << "config error: " << o.config << " has no sweep section\n";
        tp_config_destroy(cfg);
        return 2;
    }
    const std::string out = o.out.empty() ? read_string(tp_config_output_dir, cfg) : o.out;
    int code = 1;
    const tp_status st = entry(cfg, out.c_str(), o.quiet ? 1 : 0, &code);
    if (st != TP_OK) std::cerr << tp_status_name(st) << ": " << tp_last_error_message() << '\n';
    else if (!o.quiet) std::cout << "results in " << out << '\n';
    tp_config_destroy(cfg);
    return code;
}

int report(const std::vector<std::string>& paths) {
    std::vector<const char*> p;
    for (const auto& s : paths) p.push_back(s.c_str());
    size_t len = 0;
    int code = 0;
    tp_report(p.data(), p.size(), nullptr, 0, &len, &code);
    std::string text(len + 1, '\0');
    const tp_status st = tp_report(p.data(), p.size(), text.data(), text.size(), &len, &code);
    if (st != TP_OK) {
        std::cerr << tp_status_name(st) << ": " << tp_last_error_message() << '\n';
        return 1;
    }
    text.resize(len);
    std::cout << text;
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-phase flow simulator and diagnostics"};
    app.set_version_flag("--version", std::string(tp_version()));
    app.require_subcommand(1);

    Options run_o, sweep_o, init_o;
    std::vector<std::string> summaries;
    auto* run = app.add_subcommand("run", "single run with invariant checks");
    add_common(run, run_o);
    auto* sweep = app.add_subcommand("sweep", "one run per eps or delta value, with trend checks");
    add_common(sweep, sweep_o);
    auto* init = app.add_subcommand("check-init", "initial-data verifications only");
    add_common(init, init_o);
    auto* rep = app.add_subcommand("report", "invariant table over summary files");
    rep->add_option("summaries", summaries, "summary.json or sweep_summary.json files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*run) return run_verb(run_o, tp_run_single, false);
    if (*sweep) return run_verb(sweep_o, tp_run_sweep, true);
    if (*init) return run_verb(init_o, tp_check_init, false);
    return report(summaries);
}
