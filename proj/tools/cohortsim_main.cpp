#include "cohortsim/cli.hpp"

int main(int argc, char** argv)
{
    return cohortsim::run_cli(argc, argv);
}
