#include "sso/run.hpp"

int main(int argc, char** argv) { return sso::run(argc, argv); }
