#include <iostream>

#include "sequnet/cli.hpp"

int main(int argc, char** argv) { return sequnet::run_cli(argc, argv, std::cout, std::cerr); }
