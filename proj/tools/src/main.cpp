#include "cfgrid/cli/cli.hpp"

int main(int argc, char** argv) { return cfgrid::cli::run(argc, argv); }
