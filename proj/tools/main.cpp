#include <string>
#include <vector>

#include "emscale/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return emscale::cli::run_cli(args);
}
