#pragma once

#include "driftfx/marketdata.hpp"
#include "driftfx/serialize.hpp"

namespace driftfx {

// Parses the synthetic-panel spec JSON (strict: unknown keys are rejected).
// Instrument quote codes default to "<symbol>=" / "<symbol>TN=" and pip_size
// to 0.0001 when omitted.
SynthConfig synth_config_from_json(const json& j);

// Full command-line entry point (subcommands: synth, fit-features, backtest,
// report). Returns the process exit code: 0 ok, 1 usage/config, 2 data,
// 3 numeric.
int run_cli(int argc, const char* const* argv);

}  // namespace driftfx
