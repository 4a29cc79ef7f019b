#include <iostream>

#include "ragdx/cli.hpp"

int main(int argc, char** argv) { return ragdx::run_cli(argc, argv, std::cout, std::cerr); }
