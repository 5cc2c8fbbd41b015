#include "pdruin/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return pdruin::run_cli(argc, argv, std::cout, std::cerr); }
