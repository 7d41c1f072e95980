#include <string>
#include <vector>

#include "boolspec/cli_commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return boolspec::run_cli(args);
}
