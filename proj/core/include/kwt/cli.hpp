#pragma once

namespace kwt {

// Parses argv and runs the named subcommand. Exit codes: 0 success, 1 for
// validation/runtime failures (the module error verbatim on stderr), 2 for
// usage errors (unknown subcommand or flag, missing required flag).
int run_cli(int argc, const char* const* argv);

}  // namespace kwt
