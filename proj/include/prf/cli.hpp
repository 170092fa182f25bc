#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace prf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "prf_lab 1.0.0";

// Every setting of a run. List-valued settings keep their command-line text
// ("32:512", "1,4,inf", "0.3,0.7") so the JSON form stays flat.
struct ExperimentConfig {
    std::string command;
    std::string model = "toy";
    std::string fn = "sinusoidal";
    int d = 1;
    long k = -1;  // size parameter; -1 means unset
    long p = -1;  // depth for bprf and midpoint; -1 means unset
    std::string grid = "32:512";
    bool drop_largest = false;
    std::string q = "1,inf";
    long n_x = 1000;
    long n_u_tree = 500;
    long n_u_inf = 0;  // 0 picks the model default
    long groups = 20;
    bool stratified = false;
    std::string border = "auto";  // auto | full | toy | purf | custom; auto follows the model
    double epsilon = -1.0;        // custom border width
    long n = 1000;
    double sigma = 0.25;
    long n_rep = 50;
    long n_prime = 0;
    double holdout_sigma = 0.25;
    long mtry = 0;
    std::string weights;
    std::string x = "0.5";
    long reps = 100000;
    long n_u = 10000;
    long t_intervals = 512;
    std::uint64_t seed = 1;
    std::string out;  // output prefix; empty means prf_<command>
    bool plot = true;

    bool operator==(const ExperimentConfig&) const = default;
};

std::string config_to_json(const ExperimentConfig& cfg);
// Unknown keys are a configuration error.
ExperimentConfig config_from_json(const std::string& text);

std::vector<std::string> command_names();

// Parses `args` (without the program name), runs the command and writes
// PREFIX.csv, PREFIX.json and, when plotting, PREFIX.gp. Returns an exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prf::cli
