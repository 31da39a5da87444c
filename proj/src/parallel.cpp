#include "netfactor/parallel.hpp"

#include "netfactor/error.hpp"

#include <cstdlib>
#include <string>

namespace netfactor {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (requested < 0) throw ParameterError("thread count must be positive");
    if (const char* env = std::getenv("NETFACTOR_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || value < 1 || value > 1024)
            throw ParameterError(std::string("NETFACTOR_THREADS must be a positive integer, got '") + env + "'");
        return static_cast<int>(value);
    }
    return 1;
}

}  // namespace netfactor
