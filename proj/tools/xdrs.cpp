#include <iostream>

#include "xdrs/cli.hpp"

int main(int argc, char** argv) { return xdrs::run_cli(argc, argv, std::cout, std::cerr); }
