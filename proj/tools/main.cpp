#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "silab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const silab::RunConfig config = silab::parse_config(args);
        return silab::run(config, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        std::cout << "RESULT command=unknown status=error" << std::endl;
        return 1;
    }
}
