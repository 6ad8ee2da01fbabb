#include "contractlab/cli.hpp"

int main(int argc, char** argv)
{
    return contractlab::run_cli(argc, argv);
}
