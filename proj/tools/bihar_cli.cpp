#include <iostream>

#include "bihar/cli.hpp"

int main(int argc, char** argv) { return bihar::cli::run(argc, argv, std::cout, std::cerr); }
