#include <iostream>

#include "hsf/cli.hpp"

int main(int argc, char** argv) { return hsf::cli::run(argc, argv, std::cout, std::cerr); }
