#include <iostream>

#include "evroute/cli.hpp"

int main(int argc, char** argv) { return evroute::cli::run(argc, argv, std::cout, std::cerr); }
