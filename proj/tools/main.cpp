#include "cli.hpp"

int main(int argc, char** argv)
{
    return statedb::cli::run_main(argc, argv);
}
