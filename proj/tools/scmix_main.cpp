#include "scmix/cli.hpp"

int main(int argc, char** argv) { return scmix::run_cli(argc, argv); }
