#include <iostream>
#include <string>
#include <vector>

#include "endovqa/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return endovqa::cli::run(args, std::cout, std::cerr);
}
