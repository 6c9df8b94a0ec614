#include "hpfc/errors.hpp"

#include <cstdio>

namespace hpfc {

static void default_warn(const std::string& msg) {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

static WarnFn g_warn = &default_warn;

void log_warning(const std::string& msg) { g_warn(msg); }

void set_warning_handler(WarnFn fn) { g_warn = fn ? fn : &default_warn; }

}  // namespace hpfc
