#include <iostream>

#include "procmatch/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return procmatch::run_cli(args, std::cout, std::cerr);
}
