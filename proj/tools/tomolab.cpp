#include "tomolab/cli.hpp"

int main(int argc, char** argv) { return tomolab::cli::run_cli(argc, argv); }
