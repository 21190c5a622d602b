#include "rfcd/cli.hpp"

int main(int argc, char** argv) { return rfcd::run_cli(argc, argv); }
