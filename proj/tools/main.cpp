#include <iostream>

#include "fedcvr/harness/cli.hpp"

int main(int argc, char** argv) { return fedcvr::harness::cli_main(argc, argv, std::cout, std::cerr); }
