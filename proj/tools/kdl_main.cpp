#include "kdl/scenario.hpp"

int main(int argc, char** argv) { return kdl::cli(argc, argv); }
