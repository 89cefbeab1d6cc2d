#include <iostream>

#include "gfc/cli.hpp"

int main(int argc, char** argv) {
    return gfc::cli::run(argc, argv, std::cout, std::cerr);
}
