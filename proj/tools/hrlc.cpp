#include <iostream>

#include "hrlc/cli.hpp"

int main(int argc, char** argv) { return hrlc::cli::run(argc, argv, std::cout, std::cerr); }
