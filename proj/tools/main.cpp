#include <iostream>

#include "peergroups/cli.hpp"

int main(int argc, char** argv) { return peergroups::cli::run(argc, argv, std::cout, std::cerr); }
