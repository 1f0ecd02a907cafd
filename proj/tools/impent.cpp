#include <iostream>

#include "impent/commands.hpp"

int main(int argc, char** argv) { return impent::run_cli(argc, argv, std::cout, std::cerr); }
