#include <iostream>

#include "srg/cli.hpp"

int main(int argc, char** argv) { return srg::cli::run_cli(argc, argv, std::cout, std::cerr); }
