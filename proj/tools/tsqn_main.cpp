#include "tsqn/commands.hpp"

int main(int argc, char** argv) { return tsqn::run_cli(argc, argv); }
