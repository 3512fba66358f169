#include <iostream>

#include "calib/cli.hpp"

int main(int argc, char** argv) { return calib::cli::run(argc, argv, std::cout, std::cerr); }
