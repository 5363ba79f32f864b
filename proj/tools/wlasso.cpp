#include <iostream>

#include "wlasso/cli.hpp"

int main(int argc, char** argv) {
    return wlasso::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
