#include "grove/app.hpp"

int main(int argc, char** argv) { return grove::app::run(argc, argv); }
