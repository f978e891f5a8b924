#include "artdelay/cli.hpp"

int main(int argc, char** argv) { return artdelay::cli_main(argc, argv); }
