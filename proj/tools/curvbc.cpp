#include <curvbc/cli.h>

int main(int argc, char** argv)
{
    return curvbc::cli::run(argc, argv);
}
