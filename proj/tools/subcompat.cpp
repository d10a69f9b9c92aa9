#include <iostream>

#include "subcompat/cli.hpp"

int main(int argc, char** argv) { return subcompat::cli::run(argc, argv, std::cout, std::cerr); }
