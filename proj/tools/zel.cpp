#include <iostream>

#include "zel/cli_io.hpp"

int main(int argc, char** argv) { return zel::run_cli(argc, argv, std::cout, std::cerr); }
