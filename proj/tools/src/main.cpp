#include "cmdp_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cmdp::cli::run(argc, argv, std::cout, std::cerr); }
