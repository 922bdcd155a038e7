#include <iostream>

#include "cusplab/app.hpp"

int main(int argc, char** argv) { return cusplab::app::main(argc, argv, std::cout, std::cerr); }
