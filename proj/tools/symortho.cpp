#include <iostream>

#include "symortho/cli.hpp"

int main(int argc, char** argv) { return symortho::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
