#include "cir/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return cir::cli::run_cli(argc, argv, std::cout, std::cerr);
}
