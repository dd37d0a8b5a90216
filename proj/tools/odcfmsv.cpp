#include <iostream>

#include "odcfmsv/cli.hpp"

int main(int argc, char** argv) { return odcf::run_cli(argc, argv, std::cout, std::cerr); }
