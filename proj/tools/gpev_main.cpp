#include <iostream>

#include "gpev/cli.hpp"

int main(int argc, char** argv) { return gpev::run_cli(argc, argv, std::cout, std::cerr); }
