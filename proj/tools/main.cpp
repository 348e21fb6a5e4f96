#include "phlqg/cli.hpp"

int main(int argc, char** argv) { return phlqg::run(argc, argv); }
