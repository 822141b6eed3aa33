#include "graphscale/cli.hpp"

int main(int argc, char** argv) { return graphscale::cli::cli_main(argc, argv); }
