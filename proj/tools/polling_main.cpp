#include <iostream>
#include <string>
#include <vector>

#include "polling/cli.hpp"

int main(int argc, char** argv) {
    return polling::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
