#pragma once

namespace rfcd {

// Entry point of the `rfcd` tool: detect, baseline, simulate, evaluate, classify.
int run_cli(int argc, char** argv);

}  // namespace rfcd
