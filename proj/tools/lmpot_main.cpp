#include "lmpot/cli.hpp"

int main(int argc, char** argv) { return lmpot::run_cli(argc, argv); }
