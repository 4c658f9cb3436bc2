#include <iostream>

#include "epicast/cli.hpp"

int main(int argc, char** argv) { return epicast::cli::run(argc, argv, std::cout, std::cerr); }
