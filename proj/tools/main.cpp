#include "mcreg/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mcreg::cli::run(argc, argv, std::cout, std::cerr); }
