#include "oapa/cli.hpp"

int main(int argc, char** argv) { return oapa::cli_main(argc, argv); }
