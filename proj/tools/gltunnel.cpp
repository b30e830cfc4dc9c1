#include "gltunnel/cli.hpp"

int main(int argc, char** argv) { return gltunnel::cli::run(argc, argv); }
