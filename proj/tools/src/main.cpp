#include <iostream>

#include "soligas_cli/cli.hpp"

int main(int argc, char** argv) { return soligas::cli::run(argc, argv, std::cout, std::cerr); }
