#include <iostream>

#include "mkedge/cli.hpp"

int main(int argc, char** argv) { return mkedge::cli::run(argc, argv, std::cout, std::cerr); }
