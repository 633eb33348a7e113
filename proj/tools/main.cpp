#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return orbfb::cli::run(argc, argv, std::cout); }
