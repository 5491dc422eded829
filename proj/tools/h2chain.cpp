#include <iostream>

#include "h2chain/cli.hpp"

int main(int argc, char** argv) { return h2chain::run_cli(argc, argv, std::cout, std::cerr); }
