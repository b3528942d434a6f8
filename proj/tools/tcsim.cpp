#include <iostream>

#include "tcsim/app/cli.hpp"

int main(int argc, char** argv) { return tcsim::app::run(argc, argv, std::cout, std::cerr); }
