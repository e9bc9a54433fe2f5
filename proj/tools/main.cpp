#include "seqdesign/cli.hpp"

int main(int argc, char** argv) { return seqdesign::run_cli(argc, argv); }
