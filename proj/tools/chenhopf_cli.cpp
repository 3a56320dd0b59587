#include <iostream>
#include <string>
#include <vector>

#include "chenhopf/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return chenhopf::cli::run(args, std::cout, std::cerr);
}
