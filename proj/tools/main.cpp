#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return sparse_tcp::cli::run(argc, argv, std::cout, std::cerr); }
