#include <iostream>

#include "rldf/cli.hpp"

int main(int argc, char** argv) { return rldf::run_cli(argc, argv, std::cout, std::cerr); }
