#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace grove::app {

// Command-line entry point: build-repo | generate | evaluate | bench | inspect-run.
// Exit 0 on success, 1 on usage errors, 2 on runtime errors.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace grove::app
