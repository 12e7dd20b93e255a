// Golden-file driver: checks one case (or all) against tests/golden, or
// rewrites the golden files with --update.

#include <CLI11.hpp>
#include <iostream>

#include "golden_runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"kspec golden-file checks"};
    std::string cli, cases_file, golden_dir, only, scratch = (std::filesystem::temp_directory_path() / "kspec_golden").string();
    unsigned threads = 1;
    bool update = false;
    app.add_option("--cli", cli, "kspec binary")->required();
    app.add_option("--cases", cases_file, "case list")->required();
    app.add_option("--golden-dir", golden_dir, "directory of golden files")->required();
    app.add_option("--case", only, "run a single case");
    app.add_option("--threads", threads, "thread count passed to kspec");
    app.add_option("--scratch", scratch, "scratch directory");
    app.add_flag("--update", update, "rewrite golden files from the current outputs");
    CLI11_PARSE(app, argc, argv);

    int failures = 0, ran = 0;
    for (const auto& c : golden::load_cases(cases_file)) {
        if (!only.empty() && c.name != only) continue;
        ++ran;
        if (update) {
            const auto o = golden::run_case(c, cli, threads, scratch);
            if (!o.ok) {
                std::cerr << "FAIL " << o.message << '\n';
                ++failures;
            } else if (c.ext != "-") {
                std::ofstream(golden::golden_path(c, golden_dir), std::ios::binary) << o.output;
                std::cout << "updated " << c.name << '\n';
            }
            continue;
        }
        const auto o = golden::check_case(c, cli, threads, golden_dir, scratch);
        std::cout << (o.ok ? "ok   " : "FAIL ") << c.name << '\n';
        if (!o.ok) {
            std::cerr << o.message << '\n';
            ++failures;
        }
    }
    if (ran == 0) {
        std::cerr << "no case named '" << only << "'\n";
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
