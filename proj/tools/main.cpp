#include <iostream>
#include <string>
#include <vector>

#include "ratbench/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ratbench::run_cli(args, std::cout, std::cerr);
}
