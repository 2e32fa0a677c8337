#include <iostream>

#include "stprec/cli.hpp"

int main(int argc, char** argv)
{
    return stprec::cli::run(argc, argv, std::cout, std::cerr);
}
