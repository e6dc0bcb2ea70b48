#include "pcreg/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return pcreg::cli::run(argc, argv, std::cout, std::cerr); }
