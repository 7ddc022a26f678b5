#include "fhm/cli.hpp"

int main(int argc, char** argv)
{
    return fhm::run_cli(argc, argv);
}
