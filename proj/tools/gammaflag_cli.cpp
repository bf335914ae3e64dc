#include <iostream>

#include "gammaflag/cli.hpp"

int main(int argc, char** argv) { return gammaflag::cli::run_cli(argc, argv, std::cout, std::cerr); }
