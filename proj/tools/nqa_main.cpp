#include "nqa/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return nqa::cli::run(argc, argv, std::cout, std::cerr); }
