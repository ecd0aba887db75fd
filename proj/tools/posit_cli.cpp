#include <iostream>

#include "posit/cli/commands.hpp"

int main(int argc, char** argv) { return posit::cli::run_cli(argc, argv, std::cout, std::cerr); }
