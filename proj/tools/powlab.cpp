#include "powlab/cli.hpp"

int main(int argc, char** argv) { return powlab::run(argc, argv); }
