#include "pdisc/cli.hpp"

int main(int argc, char** argv) { return pdisc::cli::run(argc, argv); }
