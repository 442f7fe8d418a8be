#include "mixsiam/cli/commands.hpp"

int main(int argc, char** argv) { return mixsiam::cli::run_cli(argc, argv); }
