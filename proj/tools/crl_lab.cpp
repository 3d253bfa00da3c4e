#include <iostream>

#include "crl/cli.hpp"

int main(int argc, char** argv) { return crl::cli::main(argc, argv, std::cout, std::cerr); }
