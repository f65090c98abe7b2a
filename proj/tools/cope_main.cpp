#include <iostream>

#include "cope/cli/commands.hpp"

int main(int argc, char** argv) { return cope::cli::run_cli(argc, argv, std::cout, std::cerr); }
