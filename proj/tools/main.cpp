#include "levybsde/cli/runner.hpp"

int main(int argc, char** argv) { return levybsde::cli::run_cli(argc, argv); }
