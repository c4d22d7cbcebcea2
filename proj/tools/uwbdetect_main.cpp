#include <iostream>

#include "uwbdetect/cli.hpp"

int main(int argc, char** argv) { return uwbdetect::run_cli(argc, argv, std::cout, std::cerr); }
