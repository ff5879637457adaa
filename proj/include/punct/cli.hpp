#pragma once

namespace punct {

/// Entry point behind the punct_embed binary. Returns 0 on success, 1 on a
/// usage error, 2 on a data or config error.
int cli_main(int argc, const char* const* argv);

}  // namespace punct
