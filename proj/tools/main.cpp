// Apache License, Version 2.0, refer to LICENSE.txt

#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return dibpnmf::cli::run(argc, argv, std::cout, std::cerr);
}
