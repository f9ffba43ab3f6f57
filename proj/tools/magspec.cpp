#include <iostream>

#include "magspec/io/cli.hpp"

int main(int argc, char** argv) { return magspec::io::magspec_main(argc, argv, std::cout, std::cerr); }
