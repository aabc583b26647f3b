#include "driftfx/cli.hpp"

int main(int argc, char** argv) { return driftfx::run_cli(argc, argv); }
