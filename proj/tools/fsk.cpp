#include <iostream>

#include "fsk_cli.hpp"

int main(int argc, char** argv) { return fsk::cli::run(argc, argv, std::cout, std::cerr); }
