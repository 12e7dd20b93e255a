#pragma once

// Runs the CLI golden cases listed in tests/golden/cases.txt. Shared by the
// per-case ctest driver and the acceptance binary.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace golden {

namespace fs = std::filesystem;

struct Case {
    std::string name;
    int expected_exit = 0;
    std::string ext;  // "-" when only the exit code is checked
    std::vector<std::string> commands;
};

struct Outcome {
    bool ok = false;
    std::string message;
    std::string output;  // bytes of out.<ext>
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::vector<Case> load_cases(const fs::path& file) {
    std::istringstream in(read_file(file));
    std::vector<Case> out;
    std::string line;
    while (std::getline(in, line)) {
        line = strip(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        for (int i = 0; i < 3; ++i) {
            const auto bar = line.find('|', pos);
            if (bar == std::string::npos) throw std::runtime_error("malformed golden case: " + line);
            f.push_back(line.substr(pos, bar - pos));
            pos = bar + 1;
        }
        Case c{f[0], std::stoi(f[1]), f[2], {}};
        std::string rest = line.substr(pos);
        for (;;) {
            const auto k = rest.find(" ; ");
            c.commands.push_back(strip(rest.substr(0, k)));
            if (k == std::string::npos) break;
            rest = rest.substr(k + 3);
        }
        out.push_back(std::move(c));
    }
    return out;
}

inline std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) s.replace(p, from.size(), to);
    return s;
}

inline std::string shell_quote(const std::string& s) { return "'" + replace_all(s, "'", "'\\''") + "'"; }

inline int run_shell(const std::string& cmd) {
    const int st = std::system(cmd.c_str());
    if (st == -1) return -1;
    return WIFEXITED(st) ? WEXITSTATUS(st) : 128;
}

/// Runs one case in a scratch directory under `scratch_root`; the relative
/// paths keep every config echo identical across runs.
inline Outcome run_case(const Case& c, const std::string& cli, unsigned threads, const fs::path& scratch_root) {
    Outcome o;
    const fs::path dir = scratch_root / (c.name + "_t" + std::to_string(threads));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string out_name = "out." + c.ext;
    for (std::size_t i = 0; i < c.commands.size(); ++i) {
        std::string cmd = replace_all(c.commands[i], "{out}", out_name);
        const std::string log = "log" + std::to_string(i) + ".txt";
        std::string line = "cd " + shell_quote(dir.string()) + " && ";
        if (!cmd.empty() && cmd[0] == '!')
            line += "( " + cmd.substr(1) + " )";
        else
            line += shell_quote(fs::absolute(cli).string()) + " --threads " + std::to_string(threads) + " " + cmd;
        line += " > " + log + " 2>&1";
        const int code = run_shell(line);
        const bool last = i + 1 == c.commands.size();
        const int want = last ? c.expected_exit : 0;
        if (code != want) {
            std::string detail;
            try {
                detail = read_file(dir / log);
            } catch (const std::exception&) {
            }
            o.message = c.name + ": command " + std::to_string(i + 1) + " exited " + std::to_string(code) + ", expected " +
                        std::to_string(want) + "\n  " + cmd + "\n" + detail;
            return o;
        }
    }
    if (c.ext != "-") {
        if (!fs::exists(dir / out_name)) {
            o.message = c.name + ": no " + out_name + " written";
            return o;
        }
        o.output = read_file(dir / out_name);
    }
    o.ok = true;
    return o;
}

inline fs::path golden_path(const Case& c, const fs::path& golden_dir) { return golden_dir / (c.name + "." + c.ext); }

/// Runs a case and byte-compares it with its golden file.
inline Outcome check_case(const Case& c, const std::string& cli, unsigned threads, const fs::path& golden_dir,
                          const fs::path& scratch_root) {
    Outcome o = run_case(c, cli, threads, scratch_root);
    if (!o.ok || c.ext == "-") return o;
    const fs::path g = golden_path(c, golden_dir);
    if (!fs::exists(g)) {
        o.ok = false;
        o.message = c.name + ": golden file " + g.string() + " is missing";
        return o;
    }
    if (read_file(g) != o.output) {
        o.ok = false;
        o.message = c.name + ": output differs from " + g.string() + " (threads " + std::to_string(threads) + ")";
    }
    return o;
}

}  // namespace golden
