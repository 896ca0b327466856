#include <iostream>

#include "mmcert/cli.hpp"

int main(int argc, char** argv) { return mmcert::run_cli(argc, argv, std::cout, std::cerr); }
