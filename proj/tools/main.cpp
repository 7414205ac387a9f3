#include "rhtp/cli.hpp"

int main(int argc, char** argv) { return rhtp::cli::cli_main(argc, argv); }
