#include "dualstab/cli.hpp"

int main(int argc, char** argv) { return dualstab::cli::run_main(argc, argv); }
