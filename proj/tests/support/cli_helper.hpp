#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <unistd.h>

namespace mpmdp::test {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string cli_path() {
#ifdef MPMDP_CLI_PATH
    return MPMDP_CLI_PATH;
#else
    const char* p = std::getenv("MPMDP_CLI_PATH");
    if (!p) throw std::runtime_error("MPMDP_CLI_PATH not set");
    return p;
#endif
}

inline std::string data_dir() {
#ifdef MPMDP_DATA_DIR
    return MPMDP_DATA_DIR;
#else
    const char* p = std::getenv("MPMDP_DATA_DIR");
    if (!p) throw std::runtime_error("MPMDP_DATA_DIR not set");
    return p;
#endif
}

inline std::string temp_dir() {
    static int counter = 0;
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() /
                         ("mpmdp_cli_test_" + std::to_string(::getpid()) + "_" +
                          std::to_string(counter++));
    fs::create_directories(dir);
    return dir.string();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

/// Runs the CLI binary with `args` appended, capturing stdout, stderr and the
/// exit code.
inline CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string err_file = "cli_stderr_" + std::to_string(counter++) + ".txt";
    const std::string cmd = cli_path() + " " + args + " 2>" + err_file;
    CliResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed for: " + cmd);
    std::array<char, 4096> buf;
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), got);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.err = read_file(err_file);
    std::remove(err_file.c_str());
    return result;
}

} // namespace mpmdp::test
