#include <iostream>

#include "msvi/cli.hpp"

int main(int argc, char** argv) { return msvi::cli::main(argc, argv, std::cout, std::cerr); }
