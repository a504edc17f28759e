#pragma once

namespace projcvm {

// Entry point shared by the binary and the tests.
// Exit codes: 0 success, 2 usage error, 3 data error.
int cli_main(int argc, const char* const* argv);

}  // namespace projcvm
