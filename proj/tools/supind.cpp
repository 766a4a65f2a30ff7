#include <iostream>

#include "supind/cli.hpp"

int main(int argc, char** argv) { return supind::cli::main_entry(argc, argv, std::cout, std::cerr); }
