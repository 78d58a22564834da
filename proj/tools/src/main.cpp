#include <iostream>

#include "minexp/cli/commands.hpp"

int main(int argc, char** argv) { return minexp::cli::run(argc, argv, std::cout, std::cerr); }
