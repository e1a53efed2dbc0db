#include <iostream>

#include "seqdet/cli.hpp"

int main(int argc, char** argv) { return seqdet::cli::run(argc, argv, std::cout, std::cerr); }
