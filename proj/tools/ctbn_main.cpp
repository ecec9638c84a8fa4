#include "ctbn/cli.hpp"

int main(int argc, char** argv) { return ctbn::cli::run_cli(argc, argv); }
