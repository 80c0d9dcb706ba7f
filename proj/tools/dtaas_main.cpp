#include <iostream>

#include "dtaas/cli.hpp"

int main(int argc, char** argv) { return dtaas::cli::run_cli(argc, argv, std::cout, std::cerr); }
