#include "specsense/cli.hpp"

int main(int argc, char** argv) { return specsense::run_cli(argc, argv); }
