#pragma once

// ==========================================================================
// Command-line front end
// ==========================================================================
// Wires flag/config-file settings to the library modules and emits CSV
// reports.  Reports are written atomically (tmp file + rename) with a
// # -prefixed header block carrying the fully resolved configuration, so
// reruns with the same seed are byte-identical and diff-able.  Every command
// finishes with one machine-parsable line
//
//     RESULT command=<name> status=<ok|fail> key=value ...
//
// and the process exit status is 0 exactly when every requested check
// passed.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "silab/risk_harness.hpp"

namespace silab {

struct RunConfig {
    // commands: simulate | estimate | oracle | risk-sweep | rate-fit |
    //           lb-check | calibrate | selftest | help
    std::string command = "selftest";

    // empty composes "cusp:beta=<beta>,L=<L>,theta=<theta_deg>deg"
    std::string signal;
    std::string kernel = "default";  // default | order<n>

    double epsilon = 0.0625;
    double r = 2.0;
    double beta = 1.0;
    double L = 1.0;
    double p = 2.0;
    double theta_deg = 30.0;
    int n_grid = 256;
    int n_directions = 32;
    int replicates = 200;
    std::uint64_t seed = 1;
    double threshold_scale = 0.0;  // 0 = calibrate on pure noise per run
    int jobs = 0;                  // 0 = hardware default
    std::string out_dir = ".";
    bool heavy = false;       // extends sweeps to eps = 2^-11 and >= 400 replicates
    bool dump_field = false;  // simulate also writes the noiseless field

    void validate() const;

    // resolved pieces
    std::string signal_preset() const;
    SingleIndexSignal make_signal() const;
    ProductKernel make_kernel() const;
    SelectorConfig selector() const;
    RiskConfig mc() const;
    std::vector<double> sweep_epsilons() const;  // 2^-4 .. 2^-9 (heavy: 2^-11)
};

// Flags (--epsilon 0.05) override config-file entries (epsilon=0.05, loaded
// via --config FILE); unknown flags and unknown file keys are rejected.
// --help turns the command into "help" (run prints nothing and returns 0).
RunConfig parse_config(const std::vector<std::string>& args);

// Executes the command, writing reports under out_dir and the RESULT line to
// out.  Returns the process exit status.  On error nothing is left behind:
// reports are staged in memory and written only after the command succeeds.
int run(const RunConfig& config, std::ostream& out);

}  // namespace silab
